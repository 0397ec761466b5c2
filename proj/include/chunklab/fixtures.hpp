#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>

namespace chunklab::fixtures {

// ---------------------------------------------------------------------------
// Embedded measurement fixtures, transcribed once from the upstream
// benchmark runs and stored as versioned CSV with pinned checksums. All
// derived quantities (ratios, averages, call counts) are recomputed by the
// analysis code; nothing derived is hardcoded here beyond the printed
// columns retained for cross-checking.
// ---------------------------------------------------------------------------

inline constexpr int kFixtureVersion = 1;

// Dispatch-cost surrogate constant: the static-64 harness point
// (3.299 ms over 64 calls) rounded to 0.05155 ms per launch.
inline constexpr double kDispatchPerCallMs = 0.05155;

// Sequence length behind the sweep fixtures.
inline constexpr std::size_t kSweepSeqLen = 4096;

// Static chunk-size sweep latency curve (consumer GPU, L=4096, FP16, n=30).
inline constexpr std::string_view kChunkSweepCsv =
    "chunk,calls,latency_ms,std_ms,speedup_vs_64\n"
    "32,128,6.315,0.385,0.52\n"
    "64,64,3.299,0.257,1.00\n"
    "128,32,1.867,0.130,1.77\n"
    "256,16,1.148,0.048,2.87\n"
    "512,8,0.748,0.037,4.41\n";

// Activation-distribution perturbation sweep (L=4096; speedups are vs the
// static-64 reference row).
inline constexpr std::string_view kPerturbationCsv =
    "distribution,entropy_nats,chunk,calls,latency_ms,std_ms,speedup_vs_64\n"
    "uniform,5.545,512,8,0.741,0.035,4.34\n"
    "standard_normal,4.612,256,16,1.219,0.136,2.64\n"
    "laplace,3.892,256,16,1.140,0.043,2.90\n"
    "sparse_10pct,0.789,64,64,3.188,0.105,1.01\n"
    "sparse_2pct,0.192,32,128,6.096,0.213,0.52\n"
    "static_64_reference,,64,64,3.21,0.13,1.00\n";

// Unified routed scheduler ablation (976-token prompt, n=50). Distribution
// counts are over 2544 scheduler invocations.
inline constexpr std::string_view kRoutedAblationCsv =
    "config,scheduler,latency_ms,std_ms,slowdown_vs_best_static,chunk_distribution\n"
    "static-128,constant,892.71,12.11,1.0013,128:2544\n"
    "static-256,constant,914.43,14.58,1.0257,256:2544\n"
    "static-512,constant,891.51,10.17,1.0000,512:2544\n"
    "static-1024,constant,897.66,16.59,1.0069,1024:2544\n"
    "static-2048,constant,907.93,10.60,1.0184,2048:2544\n"
    "no-entropy,midpoint,903.77,29.67,1.0137,1024:2544\n"
    "random,uniform,899.17,10.32,1.0086,128:521;256:507;512:502;1024:528;2048:486\n"
    "full-histogram,entropy,970.26,27.36,1.0883,1024:2544\n"
    "sampled-histogram,entropy-stride-8,932.69,20.70,1.0462,1024:2544\n"
    "token-histogram,entropy-stride-8,999.68,24.35,1.1213,1024:2173;2048:371\n"
    "cheap-moment-proxy,moment,921.81,20.86,1.0340,1024:2544\n"
    "variance-proxy,moment,934.80,26.04,1.0486,1024:2332;2048:212\n"
    "kurtosis-proxy,moment,922.96,14.96,1.0353,2048:2544\n"
    "guarded-sampled-histogram,guarded-fallback,903.03,25.35,1.0129,512:2544\n"
    "learned-table,seq-len-rule,897.63,7.40,1.0069,512:2544\n";

// Per-regime static chunk sweep (eight serving regimes, chunks 128/256/512).
inline constexpr std::string_view kMixedRegimeCsv =
    "regime,approx_tokens,c128_mean,c128_std,c256_mean,c256_std,c512_mean,"
    "c512_std,best_chunk\n"
    "short_conversational,25,184.1,5.6,185.5,5.4,187.6,5.5,128\n"
    "long_document_qa,1500,307.8,4.6,306.0,5.2,305.0,3.9,512\n"
    "source_code,2100,349.1,4.6,347.3,4.9,345.9,5.0,512\n"
    "structured_logs,2048,347.6,3.3,342.6,4.8,342.7,3.1,256\n"
    "tabular_data,2048,371.5,9.9,349.8,3.8,349.7,3.9,512\n"
    "repetitive_policy,1550,319.5,4.5,312.9,5.6,312.5,2.7,512\n"
    "mixed_language,2048,346.5,5.0,345.2,6.2,344.2,2.8,512\n"
    "form_style,2048,352.0,4.6,349.9,2.4,349.6,4.1,512\n";

// Kernel-level policy comparison (isolated kernel timings; the speedup
// column is carried over from the dispatch-harness sweep, not derivable from
// the latency column here).
inline constexpr std::string_view kKernelPolicyCsv =
    "policy,chunk,latency_ms,std_ms,speedup_vs_64\n"
    "static-64,64,0.101,0.025,1.00\n"
    "rule-legacy-8.0,256,0.017,0.000,3.24\n"
    "rule-default-logk,512,0.013,0.006,4.41\n"
    "static-512-oracle,512,0.013,0.006,4.41\n";

// H_ref sensitivity: chunk selected for two entropy scenarios under four
// reference values. Latencies are looked up from the chunk sweep above.
inline constexpr std::string_view kHrefAblationCsv =
    "h_ref_label,h_ref_nats,scenario,signal_nats,r,chunk,latency_ms\n"
    "log64,4.1588830833596715,w1_benchmark,4.60,1.000,512,0.748\n"
    "5.0,5.0,w1_benchmark,4.60,0.921,512,0.748\n"
    "6.0,6.0,w1_benchmark,4.60,0.767,512,0.748\n"
    "legacy_8.0,8.0,w1_benchmark,4.60,0.576,256,1.148\n"
    "log64,4.1588830833596715,real_checkpoint,4.02,0.966,512,0.748\n"
    "5.0,5.0,real_checkpoint,4.02,0.804,512,0.748\n"
    "6.0,6.0,real_checkpoint,4.02,0.670,256,1.148\n"
    "legacy_8.0,8.0,real_checkpoint,4.02,0.503,256,1.148\n";

// Bin-count sensitivity: measured entropy per histogram resolution with the
// chunk selected under both calibrations (10^6 samples per scenario).
inline constexpr std::string_view kBinCountCsv =
    "distribution,bins,entropy_nats,log_k,ratio,chunk_calibrated,chunk_legacy8\n"
    "standard_normal,32,2.644,3.466,0.763,512,256\n"
    "standard_normal,64,3.334,4.159,0.802,512,256\n"
    "standard_normal,128,4.027,4.852,0.830,512,256\n"
    "standard_normal,256,4.720,5.545,0.851,512,256\n"
    "standard_normal,512,5.413,6.238,0.868,512,256\n"
    "standard_normal,1024,6.106,6.931,0.881,512,512\n"
    "uniform,32,3.466,3.466,1.000,512,256\n"
    "uniform,64,4.159,4.159,1.000,512,256\n"
    "uniform,128,4.852,4.852,1.000,512,256\n"
    "uniform,256,5.545,5.545,1.000,512,512\n"
    "uniform,512,6.238,6.238,1.000,512,512\n";

// Fusion launch-count sweep with surrogate dispatch latency at 0.05155 ms
// per call. Reduction is vs the matching no-fusion row (blank there).
inline constexpr std::string_view kFusionSweepCsv =
    "n,regime,policy,launches,surrogate_ms,reduction_pct\n"
    "4,low,no-fusion,4,0.206,\n"
    "4,low,static-3,2,0.103,50.0\n"
    "4,low,entropy-guided,1,0.052,75.0\n"
    "4,mixed,no-fusion,4,0.206,\n"
    "4,mixed,static-3,2,0.103,50.0\n"
    "4,mixed,entropy-guided,1,0.052,75.0\n"
    "4,high,no-fusion,4,0.206,\n"
    "4,high,static-3,2,0.103,50.0\n"
    "4,high,entropy-guided,1,0.052,75.0\n"
    "8,low,no-fusion,8,0.412,\n"
    "8,low,static-3,3,0.155,62.5\n"
    "8,low,entropy-guided,2,0.103,75.0\n"
    "8,mixed,no-fusion,8,0.412,\n"
    "8,mixed,static-3,3,0.155,62.5\n"
    "8,mixed,entropy-guided,3,0.155,62.5\n"
    "8,high,no-fusion,8,0.412,\n"
    "8,high,static-3,3,0.155,62.5\n"
    "8,high,entropy-guided,2,0.103,75.0\n"
    "16,low,no-fusion,16,0.824,\n"
    "16,low,static-3,6,0.309,62.5\n"
    "16,low,entropy-guided,5,0.258,68.8\n"
    "16,mixed,no-fusion,16,0.824,\n"
    "16,mixed,static-3,6,0.309,62.5\n"
    "16,mixed,entropy-guided,6,0.309,62.5\n"
    "16,high,no-fusion,16,0.824,\n"
    "16,high,static-3,6,0.309,62.5\n"
    "16,high,entropy-guided,6,0.309,62.5\n"
    "32,mixed,no-fusion,32,1.650,\n"
    "32,mixed,static-3,11,0.567,65.6\n"
    "32,mixed,entropy-guided,14,0.721,56.2\n"
    "64,mixed,no-fusion,64,3.299,\n"
    "64,mixed,static-3,22,1.134,65.6\n"
    "64,mixed,entropy-guided,28,1.443,56.2\n";

// FNV-1a 64-bit over the raw CSV text.
inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct FixtureEntry {
  std::string_view name;
  std::string_view csv;
};

inline constexpr FixtureEntry kFixtures[] = {
    {"chunk_sweep", kChunkSweepCsv},
    {"perturbation", kPerturbationCsv},
    {"routed_ablation", kRoutedAblationCsv},
    {"mixed_regime", kMixedRegimeCsv},
    {"kernel_policy", kKernelPolicyCsv},
    {"href_ablation", kHrefAblationCsv},
    {"bin_count", kBinCountCsv},
    {"fusion_sweep", kFusionSweepCsv},
};

inline std::map<std::string, std::string> checksum_map() {
  std::map<std::string, std::string> out;
  for (const auto& f : kFixtures) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(f.csv)));
    out[std::string(f.name)] = buf;
  }
  return out;
}

}  // namespace chunklab::fixtures
