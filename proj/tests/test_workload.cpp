#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chunklab/rng.hpp"
#include "chunklab/workload.hpp"

using namespace chunklab;

TEST_CASE("two-point affine fit matches the closed form") {
  const std::vector<SweepPoint> points = {{512, 8, 0.748, 0.037, 0.0},
                                          {64, 64, 3.299, 0.257, 0.0}};
  const LatencyModel m = fit_latency_model(points);
  CHECK(m.per_call_ms == Catch::Approx(0.04555).margin(5e-5));
  CHECK(m.base_ms == Catch::Approx(0.3836).margin(5e-4));
}

TEST_CASE("points exactly on a line fit with zero residuals") {
  std::vector<SweepPoint> points;
  for (int calls : {2, 5, 9, 31}) {
    SweepPoint p;
    p.chunk = calls;
    p.calls = calls;
    p.latency_ms = 0.25 + 0.05 * calls;
    points.push_back(p);
  }
  const LatencyModel m = fit_latency_model(points);
  CHECK(m.per_call_ms == Catch::Approx(0.05).margin(1e-12));
  CHECK(m.base_ms == Catch::Approx(0.25).margin(1e-12));
  for (const auto& p : points)
    CHECK(predict_latency(m, p.calls) ==
          Catch::Approx(p.latency_ms).margin(1e-12));
}

TEST_CASE("embedded sweep fits within 5% and with non-negative coefficients") {
  const auto sweep = load_chunk_sweep();
  const LatencyModel m = fit_latency_model(sweep);
  CHECK(m.per_call_ms >= 0.0);
  CHECK(m.base_ms >= 0.0);
  for (const auto& p : sweep) {
    const double rel =
        std::fabs(predict_latency(m, p.calls) - p.latency_ms) / p.latency_ms;
    CHECK(rel <= 0.05);
  }
}

TEST_CASE("fit requires two distinct call counts") {
  const std::vector<SweepPoint> degenerate = {{64, 64, 3.3, 0.0, 0.0},
                                              {64, 64, 3.2, 0.0, 0.0}};
  CHECK_THROWS_AS(fit_latency_model(degenerate), invalid_input);
}

TEST_CASE("speedup ratios from the embedded sweep") {
  const auto sweep = load_chunk_sweep();
  CHECK(predict_speedup(sweep, 64, 512) == Catch::Approx(4.41).margin(0.01));
  CHECK(predict_speedup(sweep, 64, 256) == Catch::Approx(2.87).margin(0.01));
  CHECK(predict_speedup(sweep, 256, 256) == 1.0);
  CHECK_THROWS_WITH(predict_speedup(sweep, 64, 1024),
                    "unknown chunk without model");

  // Model fallback covers chunks outside the sweep.
  const LatencyModel m = fit_latency_model(sweep);
  const double r = predict_speedup(sweep, m, 64, 1024, 4096);
  CHECK(r > 1.0);

  // Antisymmetry on measured means.
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int chunks[] = {32, 64, 128, 256, 512};
    const int a = chunks[rng.index(5)];
    const int b = chunks[rng.index(5)];
    CHECK(predict_speedup(sweep, a, b) * predict_speedup(sweep, b, a) ==
          Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("mixed-regime arithmetic on the embedded fixture") {
  const auto records = load_mixed_regime();
  const MixedRegimeReport rep =
      analyze_mixed_regime(records, LearnedTablePolicy{50, 128, 512});

  auto avg = [&](int chunk) {
    for (const auto& [c, v] : rep.static_averages)
      if (c == chunk) return v;
    FAIL("missing chunk column");
    return 0.0;
  };
  CHECK(avg(128) == Catch::Approx(322.3).margin(0.05));
  CHECK(avg(256) == Catch::Approx(317.4).margin(0.05));
  CHECK(avg(512) == Catch::Approx(317.1).margin(0.0501));
  CHECK(rep.best_static_chunk == 512);
  CHECK(rep.oracle_avg == Catch::Approx(316.7).margin(0.05));
  CHECK(rep.oracle_delta_pct == Catch::Approx(-0.14).margin(0.005));
  CHECK(std::fabs(rep.rule_minus_oracle_ms) <= 0.05);

  // The strict tie-break on structured logs picks 256 (342.6 < 342.7).
  bool logs_found = false;
  for (const auto& [regime, best] : rep.per_regime_best) {
    if (regime == "structured_logs") {
      CHECK(best == 256);
      logs_found = true;
    }
  }
  CHECK(logs_found);
}

TEST_CASE("identical rows make the oracle equal every static average") {
  std::vector<RegimeRecord> records;
  for (int i = 0; i < 4; ++i) {
    RegimeRecord rec;
    rec.regime = "r" + std::to_string(i);
    rec.approx_tokens = 100.0;
    rec.latency_by_chunk[128] = {10.0, 0.1};
    rec.latency_by_chunk[512] = {10.0, 0.1};
    records.push_back(rec);
  }
  const MixedRegimeReport rep =
      analyze_mixed_regime(records, LearnedTablePolicy{50, 128, 512});
  for (const auto& [chunk, v] : rep.static_averages) CHECK(v == 10.0);
  CHECK(rep.oracle_avg == 10.0);
  CHECK(rep.rule_avg == 10.0);
}

TEST_CASE("oracle dominance on random record sets") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RegimeRecord> records;
    const std::size_t regimes = 2 + rng.index(6);
    for (std::size_t i = 0; i < regimes; ++i) {
      RegimeRecord rec;
      rec.regime = "r" + std::to_string(i);
      rec.approx_tokens = rng.uniform(10.0, 2048.0);
      for (int chunk : {128, 256, 512})
        rec.latency_by_chunk[chunk] = {rng.uniform(100.0, 400.0), 1.0};
      records.push_back(rec);
    }
    const MixedRegimeReport rep =
        analyze_mixed_regime(records, LearnedTablePolicy{50, 128, 512});
    for (const auto& [chunk, avg] : rep.static_averages)
      CHECK(rep.oracle_avg <= avg + 1e-12);
    // The rule is itself a per-regime selection, so it also dominates none
    // and is dominated by the oracle.
    CHECK(rep.oracle_avg <= rep.rule_avg + 1e-12);
  }
}

TEST_CASE("sequence-length-rule sandwich on the embedded data") {
  const auto records = load_mixed_regime();
  const MixedRegimeReport rep =
      analyze_mixed_regime(records, LearnedTablePolicy{50, 128, 512});
  CHECK(rep.oracle_avg <= rep.rule_avg + 1e-12);
  CHECK(rep.rule_avg <= rep.best_static_avg + 1e-12);
}

TEST_CASE("missing chunk column is reported") {
  std::vector<RegimeRecord> records(2);
  records[0].regime = "a";
  records[0].latency_by_chunk[128] = {1.0, 0.0};
  records[0].latency_by_chunk[512] = {1.0, 0.0};
  records[1].regime = "b";
  records[1].latency_by_chunk[128] = {1.0, 0.0};
  CHECK_THROWS_AS(
      analyze_mixed_regime(records, LearnedTablePolicy{50, 128, 512}),
      invalid_input);
}

TEST_CASE("routed-ablation slowdowns reproduce the published ratios") {
  const auto rows = load_routed_ablation();
  const auto slowdowns = compute_slowdowns(rows, "static-512");
  REQUIRE(slowdowns.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    CHECK(slowdowns[i].second ==
          Catch::Approx(rows[i].printed_slowdown).margin(0.0005));

  // Named spot checks.
  auto ratio_of = [&](const std::string& name) {
    for (const auto& [config, ratio] : slowdowns)
      if (config == name) return ratio;
    FAIL("missing row " + name);
    return 0.0;
  };
  CHECK(ratio_of("sampled-histogram") == Catch::Approx(1.0462).margin(0.0005));
  CHECK(ratio_of("guarded-sampled-histogram") ==
        Catch::Approx(1.0129).margin(0.0005));
  CHECK(ratio_of("learned-table") == Catch::Approx(1.0069).margin(0.0005));
  CHECK(ratio_of("static-512") == 1.0);

  CHECK_THROWS_WITH(compute_slowdowns(rows, "static-4096"),
                    "missing baseline: static-4096");
}

TEST_CASE("ordering: static-512 is the best row and adaptive rows are slower") {
  const auto rows = load_routed_ablation();
  const auto slowdowns = compute_slowdowns(rows, "static-512");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].config == "static-512") continue;
    CHECK(slowdowns[i].second > 1.0);
  }
  for (const auto& row : rows) {
    std::size_t total = 0;
    for (const auto& [chunk, count] : row.chunk_distribution) total += count;
    CHECK(total == 2544);
  }
}

TEST_CASE("fixture checksums are pinned and stable") {
  const auto checksums = fixtures::checksum_map();
  CHECK(checksums.size() == 8);
  CHECK(checksums.at("chunk_sweep") ==
        checksums.at("chunk_sweep"));  // deterministic
  for (const auto& [name, hex] : checksums) CHECK(hex.size() == 16);
}
