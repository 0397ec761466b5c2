#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chunklab/chunk.hpp"
#include "chunklab/common.hpp"
#include "chunklab/fixtures.hpp"

namespace chunklab {

// ---------------------------------------------------------------------------
// Workload analysis over the embedded measurement fixtures: an affine
// calls -> milliseconds latency model, chunk-sweep speedup ratios, the
// mixed-regime oracle / sequence-length-rule arithmetic, and the routed
// ablation slowdown table.
// ---------------------------------------------------------------------------

struct SweepPoint {
  int chunk = 0;
  int calls = 0;
  double latency_ms = 0.0;
  double std_ms = 0.0;
  double printed_speedup = 0.0;  // vs the chunk-64 row, as published
};

struct LatencyModel {
  double per_call_ms = 0.0;  // slope
  double base_ms = 0.0;      // intercept
};

inline double predict_latency(const LatencyModel& m, double calls) {
  return m.base_ms + m.per_call_ms * calls;
}

// Least-squares affine fit of latency on call count.
inline LatencyModel fit_latency_model(const std::vector<SweepPoint>& sweep) {
  std::vector<int> distinct;
  for (const auto& p : sweep)
    if (std::find(distinct.begin(), distinct.end(), p.calls) == distinct.end())
      distinct.push_back(p.calls);
  if (distinct.size() < 2)
    throw invalid_input("latency fit needs >= 2 distinct call counts");

  const double n = static_cast<double>(sweep.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& p : sweep) {
    sx += p.calls;
    sy += p.latency_ms;
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : sweep) {
    const double dx = p.calls - mx;
    sxx += dx * dx;
    sxy += dx * (p.latency_ms - my);
  }
  LatencyModel m;
  m.per_call_ms = sxy / sxx;
  m.base_ms = my - m.per_call_ms * mx;
  return m;
}

// Ratio of measured mean latencies chunk_a / chunk_b from sweep points.
inline double predict_speedup(const std::vector<SweepPoint>& sweep,
                              int chunk_a, int chunk_b) {
  auto find = [&](int chunk) -> const SweepPoint* {
    for (const auto& p : sweep)
      if (p.chunk == chunk) return &p;
    return nullptr;
  };
  const SweepPoint* a = find(chunk_a);
  const SweepPoint* b = find(chunk_b);
  if (!a || !b)
    throw invalid_input("unknown chunk without model");
  return a->latency_ms / b->latency_ms;
}

// Model-backed ratio for chunks outside the measured sweep.
inline double predict_speedup(const LatencyModel& m, int chunk_a, int chunk_b,
                              std::size_t seq_len) {
  const double la = predict_latency(
      m, static_cast<double>(kernel_calls(seq_len, chunk_a)));
  const double lb = predict_latency(
      m, static_cast<double>(kernel_calls(seq_len, chunk_b)));
  return la / lb;
}

// Sweep lookup first, model fallback.
inline double predict_speedup(const std::vector<SweepPoint>& sweep,
                              const std::optional<LatencyModel>& model,
                              int chunk_a, int chunk_b, std::size_t seq_len) {
  auto have = [&](int chunk) {
    for (const auto& p : sweep)
      if (p.chunk == chunk) return true;
    return false;
  };
  if (have(chunk_a) && have(chunk_b))
    return predict_speedup(sweep, chunk_a, chunk_b);
  if (!model) throw invalid_input("unknown chunk without model");
  return predict_speedup(*model, chunk_a, chunk_b, seq_len);
}

// ------------------------------ mixed regime -------------------------------

struct MeanStd {
  double mean = 0.0;
  double std_dev = 0.0;
};

struct RegimeRecord {
  std::string regime;
  double approx_tokens = 0.0;
  std::map<int, MeanStd> latency_by_chunk;  // chunk -> mean/std ms
  int printed_best_chunk = 0;
};

struct MixedRegimeReport {
  std::vector<std::pair<int, double>> static_averages;  // chunk, equal-weight
  int best_static_chunk = 0;
  double best_static_avg = 0.0;
  double oracle_avg = 0.0;       // mean of per-regime minima
  double oracle_delta_pct = 0.0; // (oracle - best static) / best static * 100
  double rule_avg = 0.0;         // sequence-length rule average
  double rule_minus_oracle_ms = 0.0;
  std::vector<std::pair<std::string, int>> per_regime_best;
};

// Equal-weight averages per chunk, the per-regime oracle (mean of strict
// minima), and the sequence-length rule (short chunk for regimes under the
// token threshold).
inline MixedRegimeReport analyze_mixed_regime(
    const std::vector<RegimeRecord>& records, const LearnedTablePolicy& rule) {
  if (records.empty()) throw invalid_input("no regime records");
  const auto& chunks = records.front().latency_by_chunk;
  for (const auto& rec : records) {
    for (const auto& [chunk, _] : chunks) {
      if (!rec.latency_by_chunk.count(chunk))
        throw invalid_input("missing chunk column: " + std::to_string(chunk));
    }
    if (rec.latency_by_chunk.size() != chunks.size())
      throw invalid_input("missing chunk column");
  }
  if (!chunks.count(rule.short_chunk) || !chunks.count(rule.long_chunk))
    throw invalid_input("missing chunk column for the sequence-length rule");

  MixedRegimeReport rep;
  const double n = static_cast<double>(records.size());
  for (const auto& [chunk, _] : chunks) {
    double sum = 0.0;
    for (const auto& rec : records) sum += rec.latency_by_chunk.at(chunk).mean;
    rep.static_averages.emplace_back(chunk, sum / n);
  }
  rep.best_static_chunk = rep.static_averages.front().first;
  rep.best_static_avg = rep.static_averages.front().second;
  for (const auto& [chunk, avg] : rep.static_averages) {
    if (avg < rep.best_static_avg) {
      rep.best_static_chunk = chunk;
      rep.best_static_avg = avg;
    }
  }

  double oracle_sum = 0.0;
  double rule_sum = 0.0;
  for (const auto& rec : records) {
    int best_chunk = 0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [chunk, ms] : rec.latency_by_chunk) {
      if (ms.mean < best) {  // strict minimum by mean
        best = ms.mean;
        best_chunk = chunk;
      }
    }
    oracle_sum += best;
    rep.per_regime_best.emplace_back(rec.regime, best_chunk);

    const int rule_chunk =
        rec.approx_tokens < static_cast<double>(rule.threshold_tokens)
            ? rule.short_chunk
            : rule.long_chunk;
    rule_sum += rec.latency_by_chunk.at(rule_chunk).mean;
  }
  rep.oracle_avg = oracle_sum / n;
  rep.rule_avg = rule_sum / n;
  rep.oracle_delta_pct =
      (rep.oracle_avg - rep.best_static_avg) / rep.best_static_avg * 100.0;
  rep.rule_minus_oracle_ms = rep.rule_avg - rep.oracle_avg;
  return rep;
}

// ----------------------------- routed ablation -----------------------------

struct AblationRow {
  std::string config;
  std::string scheduler;
  double latency_ms = 0.0;
  double std_ms = 0.0;
  double printed_slowdown = 0.0;
  std::map<int, std::size_t> chunk_distribution;
};

inline std::vector<std::pair<std::string, double>> compute_slowdowns(
    const std::vector<AblationRow>& rows, const std::string& baseline_name) {
  const AblationRow* baseline = nullptr;
  for (const auto& row : rows)
    if (row.config == baseline_name) baseline = &row;
  if (!baseline) throw invalid_input("missing baseline: " + baseline_name);

  std::vector<std::pair<std::string, double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows)
    out.emplace_back(row.config, row.latency_ms / baseline->latency_ms);
  return out;
}

// ------------------------------ CSV loading --------------------------------

namespace detail {

inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::istringstream stream{std::string(text)};
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

inline std::map<int, std::size_t> parse_distribution(const std::string& text) {
  std::map<int, std::size_t> dist;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw invalid_input("bad chunk distribution: " + text);
    dist[std::stoi(item.substr(0, colon))] =
        static_cast<std::size_t>(std::stoull(item.substr(colon + 1)));
  }
  return dist;
}

}  // namespace detail

inline std::vector<SweepPoint> load_chunk_sweep(
    std::string_view csv = fixtures::kChunkSweepCsv) {
  auto rows = detail::parse_csv(csv);
  std::vector<SweepPoint> sweep;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    SweepPoint p;
    p.chunk = std::stoi(r[0]);
    p.calls = std::stoi(r[1]);
    p.latency_ms = std::stod(r[2]);
    p.std_ms = std::stod(r[3]);
    p.printed_speedup = std::stod(r[4]);
    if (static_cast<std::size_t>(p.calls) !=
        kernel_calls(fixtures::kSweepSeqLen, static_cast<std::size_t>(p.chunk)))
      throw invalid_input("sweep fixture calls column is inconsistent");
    sweep.push_back(p);
  }
  return sweep;
}

inline std::vector<RegimeRecord> load_mixed_regime(
    std::string_view csv = fixtures::kMixedRegimeCsv) {
  auto rows = detail::parse_csv(csv);
  std::vector<RegimeRecord> records;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    RegimeRecord rec;
    rec.regime = r[0];
    rec.approx_tokens = std::stod(r[1]);
    rec.latency_by_chunk[128] = {std::stod(r[2]), std::stod(r[3])};
    rec.latency_by_chunk[256] = {std::stod(r[4]), std::stod(r[5])};
    rec.latency_by_chunk[512] = {std::stod(r[6]), std::stod(r[7])};
    rec.printed_best_chunk = std::stoi(r[8]);
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<AblationRow> load_routed_ablation(
    std::string_view csv = fixtures::kRoutedAblationCsv) {
  auto rows = detail::parse_csv(csv);
  std::vector<AblationRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    AblationRow row;
    row.config = r[0];
    row.scheduler = r[1];
    row.latency_ms = std::stod(r[2]);
    row.std_ms = std::stod(r[3]);
    row.printed_slowdown = std::stod(r[4]);
    row.chunk_distribution = detail::parse_distribution(r[5]);
    std::size_t total = 0;
    for (const auto& [_, count] : row.chunk_distribution) total += count;
    if (total != 2544)
      throw invalid_input("ablation fixture distribution must sum to 2544");
    out.push_back(std::move(row));
  }
  return out;
}

struct HrefCell {
  std::string h_ref_label;
  double h_ref_nats = 0.0;
  std::string scenario;
  double signal_nats = 0.0;
  double printed_r = 0.0;
  int chunk = 0;
  double latency_ms = 0.0;
};

inline std::vector<HrefCell> load_href_ablation(
    std::string_view csv = fixtures::kHrefAblationCsv) {
  auto rows = detail::parse_csv(csv);
  std::vector<HrefCell> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out.push_back(HrefCell{r[0], std::stod(r[1]), r[2], std::stod(r[3]),
                           std::stod(r[4]), std::stoi(r[5]), std::stod(r[6])});
  }
  return out;
}

struct BinCountRow {
  std::string distribution;
  int bins = 0;
  double entropy_nats = 0.0;
  double log_k = 0.0;
  double ratio = 0.0;
  int chunk_calibrated = 0;
  int chunk_legacy8 = 0;
};

inline std::vector<BinCountRow> load_bin_count(
    std::string_view csv = fixtures::kBinCountCsv) {
  auto rows = detail::parse_csv(csv);
  std::vector<BinCountRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out.push_back(BinCountRow{r[0], std::stoi(r[1]), std::stod(r[2]),
                              std::stod(r[3]), std::stod(r[4]),
                              std::stoi(r[5]), std::stoi(r[6])});
  }
  return out;
}

struct PerturbationRow {
  std::string distribution;
  double entropy_nats = 0.0;  // NaN for the static-64 reference row
  int chunk = 0;
  int calls = 0;
  double latency_ms = 0.0;
  double std_ms = 0.0;
  double printed_speedup = 0.0;
};

inline std::vector<PerturbationRow> load_perturbation(
    std::string_view csv = fixtures::kPerturbationCsv) {
  auto rows = detail::parse_csv(csv);
  std::vector<PerturbationRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    PerturbationRow row;
    row.distribution = r[0];
    row.entropy_nats =
        r[1].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(r[1]);
    row.chunk = std::stoi(r[2]);
    row.calls = std::stoi(r[3]);
    row.latency_ms = std::stod(r[4]);
    row.std_ms = std::stod(r[5]);
    row.printed_speedup = std::stod(r[6]);
    out.push_back(std::move(row));
  }
  return out;
}

struct FusionSweepRow {
  int n = 0;
  std::string regime;
  std::string policy;
  std::size_t launches = 0;
  double surrogate_ms = 0.0;
  double reduction_pct = 0.0;  // NaN for baseline rows
};

inline std::vector<FusionSweepRow> load_fusion_sweep(
    std::string_view csv = fixtures::kFusionSweepCsv) {
  auto rows = detail::parse_csv(csv);
  std::vector<FusionSweepRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    FusionSweepRow row;
    row.n = std::stoi(r[0]);
    row.regime = r[1];
    row.policy = r[2];
    row.launches = static_cast<std::size_t>(std::stoull(r[3]));
    row.surrogate_ms = std::stod(r[4]);
    row.reduction_pct = (r.size() < 6 || r[5].empty())
                            ? std::numeric_limits<double>::quiet_NaN()
                            : std::stod(r[5]);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace chunklab
