#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "chunklab/chunk.hpp"
#include "chunklab/entropy.hpp"
#include "chunklab/fusion.hpp"
#include "chunklab/io.hpp"
#include "chunklab/scan.hpp"

namespace chunklab {

using json = nlohmann::json;

// ------------------------------- estimates ---------------------------------

inline json to_json(const EntropyEstimate& e) {
  return json{{"raw_nats", e.raw_nats},     {"normalized", e.normalized},
              {"K", e.bin_count},           {"epsilon", e.epsilon},
              {"stride", e.sample_stride},  {"sample_count", e.sample_count}};
}

inline json to_json(const ChunkDecision& d) {
  return json{{"policy", d.source_policy},
              {"chunk", d.chunk},
              {"r", d.r},
              {"signal", d.signal_nats}};
}

// -------------------------------- policies ---------------------------------
//
// Policy documents look like:
//   {"variant": "sampled_histogram", "stride": 8,
//    "bucket_set": [128, 256, 512, 1024, 2048]}
// with guarded policies nesting their inner policy under "inner".

inline PolicyVariant parse_policy_variant(const json& j);

inline SchedulerPolicy parse_policy(const json& j) {
  SchedulerPolicy p;
  p.variant = parse_policy_variant(j);
  if (!j.contains("bucket_set"))
    throw invalid_input("policy document needs bucket_set");
  p.bucket_set = j.at("bucket_set").get<std::vector<int>>();
  validate_policy(p);
  return p;
}

inline PolicyVariant parse_policy_variant(const json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "static")
    return StaticPolicy{j.at("chunk").get<int>()};
  if (variant == "no_entropy_midpoint") return NoEntropyMidpointPolicy{};
  if (variant == "random")
    return RandomPolicy{j.value("seed", std::uint64_t{0})};
  if (variant == "full_histogram") return FullHistogramPolicy{};
  if (variant == "sampled_histogram")
    return SampledHistogramPolicy{j.value("stride", std::size_t{8})};
  if (variant == "token_histogram")
    return TokenHistogramPolicy{j.value("stride", std::size_t{8})};
  if (variant == "moment_proxy") {
    MomentProxyPolicy mp;
    const std::string kind = j.value("kind", std::string("variance"));
    if (kind == "cheap") mp.kind = MomentKind::Cheap;
    else if (kind == "variance") mp.kind = MomentKind::Variance;
    else if (kind == "kurtosis") mp.kind = MomentKind::Kurtosis;
    else throw invalid_input("unknown moment kind: " + kind);
    mp.reference_scale = j.value("reference_scale", 1.0);
    return mp;
  }
  if (variant == "guarded") {
    GuardedPolicy g;
    json inner = j.at("inner");
    if (!inner.contains("bucket_set")) inner["bucket_set"] = j.at("bucket_set");
    g.inner = std::make_shared<SchedulerPolicy>(parse_policy(inner));
    g.safe_chunk = j.at("safe_chunk").get<int>();
    g.min_delta_buckets = j.value("min_delta_buckets", 2);
    return g;
  }
  if (variant == "learned_table") {
    LearnedTablePolicy l;
    l.threshold_tokens = j.value("threshold_tokens", std::size_t{50});
    l.short_chunk = j.value("short_chunk", 128);
    l.long_chunk = j.value("long_chunk", 512);
    return l;
  }
  throw invalid_input("unknown policy variant: " + variant);
}

// ----------------------------- chains and plans ----------------------------

inline json to_json(const OperatorChain& chain) {
  json ops = json::array();
  for (const auto& op : chain.ops) {
    ops.push_back(json{{"entry_entropy", op.entry_entropy},
                       {"arithmetic_intensity", op.arithmetic_intensity},
                       {"memory_traffic", op.memory_traffic},
                       {"shared_mem_cost", op.shared_mem_cost},
                       {"register_cost", op.register_cost}});
  }
  return json{{"ops", ops}};
}

inline OperatorChain chain_from_json(const json& j) {
  OperatorChain chain;
  for (const auto& op : j.at("ops")) {
    chain.ops.push_back(OperatorDesc{
        op.at("entry_entropy").get<double>(),
        op.at("arithmetic_intensity").get<double>(),
        op.at("memory_traffic").get<double>(),
        op.at("shared_mem_cost").get<double>(),
        op.at("register_cost").get<double>()});
  }
  validate_chain(chain);
  return chain;
}

inline json to_json(const FusionPlan& plan) {
  json regions = json::array();
  for (const Region& r : plan.regions)
    regions.push_back(json{{"begin", r.begin}, {"end", r.end}});
  return json{{"regions", regions},
              {"total_utility", plan.total_utility},
              {"launch_count", plan.launch_count()}};
}

// ------------------------------ scan fixtures ------------------------------
//
// Flat binary blob (all coefficient arrays concatenated as f64) plus a JSON
// manifest giving the shapes and array order, so parameter sets round-trip
// exactly.

inline void save_scan_params(const std::filesystem::path& stem,
                             const ScanParams& p) {
  std::vector<double> blob;
  blob.reserve(p.a.size() + p.b.size() + p.c.size() + p.d.size() + p.x.size());
  for (const auto* arr : {&p.a, &p.b, &p.c, &p.d, &p.x})
    blob.insert(blob.end(), arr->begin(), arr->end());
  write_flat_array(stem.string() + ".bin", blob, "f64");

  json manifest{{"channels", p.channels},
                {"state_dim", p.state_dim},
                {"seq_len", p.seq_len},
                {"arrays", json::array({json{{"name", "a"}, {"size", p.a.size()}},
                                        json{{"name", "b"}, {"size", p.b.size()}},
                                        json{{"name", "c"}, {"size", p.c.size()}},
                                        json{{"name", "d"}, {"size", p.d.size()}},
                                        json{{"name", "x"}, {"size", p.x.size()}}})},
                {"dtype", "f64"}};
  write_text_file(stem.string() + ".json", manifest.dump(2) + "\n");
}

inline ScanParams load_scan_params(const std::filesystem::path& stem) {
  const json manifest = json::parse(read_text_file(stem.string() + ".json"));
  std::vector<double> blob = read_flat_array(stem.string() + ".bin", "f64");
  ScanParams p;
  p.channels = manifest.at("channels").get<std::size_t>();
  p.state_dim = manifest.at("state_dim").get<std::size_t>();
  p.seq_len = manifest.at("seq_len").get<std::size_t>();
  std::size_t offset = 0;
  auto take = [&](std::size_t n) {
    if (offset + n > blob.size()) throw invalid_input("scan fixture truncated");
    std::vector<double> out(blob.begin() + offset, blob.begin() + offset + n);
    offset += n;
    return out;
  };
  for (const auto& arr : manifest.at("arrays")) {
    const std::string name = arr.at("name").get<std::string>();
    const std::size_t size = arr.at("size").get<std::size_t>();
    if (name == "a") p.a = take(size);
    else if (name == "b") p.b = take(size);
    else if (name == "c") p.c = take(size);
    else if (name == "d") p.d = take(size);
    else if (name == "x") p.x = take(size);
    else throw invalid_input("unknown scan array: " + name);
  }
  validate_scan_params(p);
  return p;
}

}  // namespace chunklab
