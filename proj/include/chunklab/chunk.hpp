#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chunklab/common.hpp"
#include "chunklab/entropy.hpp"
#include "chunklab/rng.hpp"

namespace chunklab {

// ---------------------------------------------------------------------------
// Entropy-to-chunk mapping
//
//   r = min(signal / h_ref, 1)
//   chunk = clip(2^round(log2(c_min + r * (c_max - c_min))), c_min, c_max)
//
// with nearest-integer rounding in log2 (ties round up), plus the full
// scheduler family built on top of it: static, midpoint, random, histogram
// variants, moment proxies, guarded fallback and the sequence-length table.
// ---------------------------------------------------------------------------

struct ChunkBounds {
  int c_min = 32;
  int c_max = 512;
};

inline void validate_bounds(const ChunkBounds& b) {
  if (b.c_min <= 0 || b.c_max <= 0 ||
      !is_power_of_two(static_cast<std::uint64_t>(b.c_min)) ||
      !is_power_of_two(static_cast<std::uint64_t>(b.c_max)) ||
      b.c_min > b.c_max)
    throw invalid_input("invalid chunk bounds");
}

enum class CalibrationMode { LogK, LegacyFixed };

struct CalibrationRef {
  CalibrationMode mode = CalibrationMode::LogK;
  double h_ref_nats = 0.0;

  // Calibrated reference: h_ref = log K, so r equals the normalized entropy.
  static CalibrationRef log_k(int bin_count) {
    if (bin_count < 2) throw invalid_input("degenerate spec");
    return {CalibrationMode::LogK, std::log(static_cast<double>(bin_count))};
  }

  // Fixed reference in raw nats (8.0 is the legacy default).
  static CalibrationRef legacy(double h_ref_nats = 8.0) {
    if (!(h_ref_nats > 0.0)) throw invalid_input("h_ref must be positive");
    return {CalibrationMode::LegacyFixed, h_ref_nats};
  }
};

struct ChunkDecision {
  int chunk = 0;
  double r = 0.0;
  std::string source_policy;
  double signal_nats = 0.0;
};

inline ChunkDecision select_chunk(double signal_nats, const ChunkBounds& bounds,
                                  const CalibrationRef& cal) {
  validate_bounds(bounds);
  if (!(cal.h_ref_nats > 0.0)) throw invalid_input("h_ref must be positive");
  if (!(signal_nats >= 0.0)) throw invalid_input("signal must be >= 0");

  const double r = std::min(signal_nats / cal.h_ref_nats, 1.0);
  const double target =
      static_cast<double>(bounds.c_min) +
      r * static_cast<double>(bounds.c_max - bounds.c_min);
  const double exponent = round_half_up(std::log2(target));
  const double pow2 = std::exp2(exponent);
  int chunk = static_cast<int>(pow2);
  chunk = std::clamp(chunk, bounds.c_min, bounds.c_max);

  ChunkDecision d;
  d.chunk = chunk;
  d.r = r;
  d.source_policy = "rule";
  d.signal_nats = signal_nats;
  return d;
}

// ceil(seq_len / chunk): launches needed to cover a sequence.
inline std::size_t kernel_calls(std::size_t seq_len, std::size_t chunk) {
  if (seq_len == 0 || chunk == 0) throw invalid_input("seq_len and chunk must be positive");
  return ceil_div(seq_len, chunk);
}

// --------------------------- scheduler family ------------------------------

struct SchedulerPolicy;

struct StaticPolicy {
  int chunk = 512;
};
struct NoEntropyMidpointPolicy {};
struct RandomPolicy {
  std::uint64_t seed = 0;
};
struct FullHistogramPolicy {};
struct SampledHistogramPolicy {
  std::size_t stride = 8;
};
struct TokenHistogramPolicy {
  std::size_t stride = 8;
};

enum class MomentKind { Cheap, Variance, Kurtosis };

// Moment proxies: each statistic is normalized to [0,1] by a configurable
// reference scale and pushed through the same log2 mapping as entropy.
// "Cheap" uses sqrt(variance).
struct MomentProxyPolicy {
  MomentKind kind = MomentKind::Variance;
  double reference_scale = 1.0;
};

struct GuardedPolicy {
  std::shared_ptr<const SchedulerPolicy> inner;
  int safe_chunk = 512;
  int min_delta_buckets = 2;
};

struct LearnedTablePolicy {
  std::size_t threshold_tokens = 50;
  int short_chunk = 128;
  int long_chunk = 512;
};

using PolicyVariant =
    std::variant<StaticPolicy, NoEntropyMidpointPolicy, RandomPolicy,
                 FullHistogramPolicy, SampledHistogramPolicy,
                 TokenHistogramPolicy, MomentProxyPolicy, GuardedPolicy,
                 LearnedTablePolicy>;

struct SchedulerPolicy {
  PolicyVariant variant;
  std::vector<int> bucket_set;  // strictly increasing powers of two
};

inline void validate_bucket_set(const std::vector<int>& buckets) {
  if (buckets.empty()) throw invalid_input("bucket_set must be non-empty");
  int prev = 0;
  for (int b : buckets) {
    if (b <= 0 || !is_power_of_two(static_cast<std::uint64_t>(b)) || b <= prev)
      throw invalid_input("bucket_set must be strictly increasing powers of two");
    prev = b;
  }
}

inline void validate_policy(const SchedulerPolicy& policy) {
  validate_bucket_set(policy.bucket_set);
  auto member = [&](int c) {
    return std::find(policy.bucket_set.begin(), policy.bucket_set.end(), c) !=
           policy.bucket_set.end();
  };
  if (const auto* s = std::get_if<StaticPolicy>(&policy.variant)) {
    if (!member(s->chunk)) throw invalid_input("static chunk not in bucket_set");
  } else if (const auto* g = std::get_if<GuardedPolicy>(&policy.variant)) {
    if (!g->inner) throw invalid_input("guarded policy needs an inner policy");
    if (!member(g->safe_chunk))
      throw invalid_input("safe chunk not in bucket_set");
    if (g->min_delta_buckets < 0)
      throw invalid_input("min_delta_buckets must be >= 0");
    validate_policy(*g->inner);
  } else if (const auto* l = std::get_if<LearnedTablePolicy>(&policy.variant)) {
    if (!member(l->short_chunk) || !member(l->long_chunk))
      throw invalid_input("learned-table chunk not in bucket_set");
  } else if (const auto* m = std::get_if<MomentProxyPolicy>(&policy.variant)) {
    if (!(m->reference_scale > 0.0))
      throw invalid_input("reference_scale must be positive");
  }
}

// Runtime features a scheduler may consume. A variant that needs a missing
// feature raises an error naming it.
struct ScheduleFeatures {
  std::optional<EntropyEstimate> full_entropy;
  std::optional<EntropyEstimate> sampled_entropy;
  std::optional<EntropyEstimate> token_entropy;
  std::optional<double> variance;
  std::optional<double> kurtosis;
  std::optional<std::size_t> seq_len;
  std::optional<int> layer_index;
};

namespace detail {

template <typename T>
const T& require_feature(const std::optional<T>& f, const char* name) {
  if (!f) throw invalid_input(std::string("missing feature: ") + name);
  return *f;
}

// Snap a power-of-two chunk to the nearest bucket_set member by log2
// distance (ties toward the larger bucket). Identity when the value is
// already a member, which it always is for gap-free bucket sets.
inline int snap_to_buckets(int chunk, const std::vector<int>& buckets) {
  int best = buckets.front();
  double best_dist = std::numeric_limits<double>::infinity();
  const double lc = std::log2(static_cast<double>(chunk));
  for (int b : buckets) {
    const double dist = std::fabs(std::log2(static_cast<double>(b)) - lc);
    if (dist < best_dist || (dist == best_dist && b > best)) {
      best = b;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace detail

// Stateful scheduler with value semantics. Only the random variant carries
// state (its seeded generator), so copies of a Scheduler evolve
// independently and deterministically.
class Scheduler {
 public:
  Scheduler(SchedulerPolicy policy, ChunkBounds bounds, CalibrationRef cal)
      : policy_(std::move(policy)), bounds_(bounds), cal_(cal) {
    validate_policy(policy_);
    validate_bounds(bounds_);
    if (const auto* r = std::get_if<RandomPolicy>(&policy_.variant))
      rng_.emplace(r->seed);
    if (const auto* g = std::get_if<GuardedPolicy>(&policy_.variant))
      inner_ = std::make_unique<Scheduler>(*g->inner, bounds_, cal_);
  }

  Scheduler(const Scheduler& other)
      : policy_(other.policy_),
        bounds_(other.bounds_),
        cal_(other.cal_),
        rng_(other.rng_),
        inner_(other.inner_ ? std::make_unique<Scheduler>(*other.inner_)
                            : nullptr) {}
  Scheduler& operator=(const Scheduler& other) {
    Scheduler tmp(other);
    std::swap(policy_, tmp.policy_);
    std::swap(bounds_, tmp.bounds_);
    std::swap(cal_, tmp.cal_);
    std::swap(rng_, tmp.rng_);
    std::swap(inner_, tmp.inner_);
    return *this;
  }
  Scheduler(Scheduler&&) noexcept = default;
  Scheduler& operator=(Scheduler&&) noexcept = default;

  ChunkDecision decide(const ScheduleFeatures& features) {
    return std::visit(
        [&](const auto& v) { return decide_impl(v, features); },
        policy_.variant);
  }

  const SchedulerPolicy& policy() const { return policy_; }

 private:
  ChunkDecision make(int chunk, double r, const char* tag, double signal) {
    ChunkDecision d;
    d.chunk = chunk;
    d.r = r;
    d.source_policy = tag;
    d.signal_nats = signal;
    return d;
  }

  ChunkDecision from_rule(double signal, const char* tag) {
    ChunkDecision d = select_chunk(signal, bounds_, cal_);
    d.chunk = detail::snap_to_buckets(d.chunk, policy_.bucket_set);
    d.source_policy = tag;
    return d;
  }

  ChunkDecision decide_impl(const StaticPolicy& p, const ScheduleFeatures&) {
    return make(p.chunk, 0.0, "static", 0.0);
  }

  ChunkDecision decide_impl(const NoEntropyMidpointPolicy&,
                            const ScheduleFeatures&) {
    // Upper-middle element: 0-based index ceil(n/2), clamped for n = 1.
    const std::size_t n = policy_.bucket_set.size();
    const std::size_t idx = std::min((n + 1) / 2, n - 1);
    return make(policy_.bucket_set[idx], 0.0, "no_entropy_midpoint", 0.0);
  }

  ChunkDecision decide_impl(const RandomPolicy&, const ScheduleFeatures&) {
    const std::size_t idx = rng_->index(policy_.bucket_set.size());
    return make(policy_.bucket_set[idx], 0.0, "random", 0.0);
  }

  ChunkDecision decide_impl(const FullHistogramPolicy&,
                            const ScheduleFeatures& f) {
    const auto& e = detail::require_feature(f.full_entropy, "full_entropy");
    return from_rule(e.raw_nats, "full_histogram");
  }

  ChunkDecision decide_impl(const SampledHistogramPolicy&,
                            const ScheduleFeatures& f) {
    const auto& e =
        detail::require_feature(f.sampled_entropy, "sampled_entropy");
    return from_rule(e.raw_nats, "sampled_histogram");
  }

  ChunkDecision decide_impl(const TokenHistogramPolicy&,
                            const ScheduleFeatures& f) {
    const auto& e = detail::require_feature(f.token_entropy, "token_entropy");
    return from_rule(e.raw_nats, "token_histogram");
  }

  ChunkDecision decide_impl(const MomentProxyPolicy& p,
                            const ScheduleFeatures& f) {
    double stat = 0.0;
    const char* tag = "moment_variance";
    switch (p.kind) {
      case MomentKind::Cheap:
        stat = std::sqrt(detail::require_feature(f.variance, "variance"));
        tag = "moment_cheap";
        break;
      case MomentKind::Variance:
        stat = detail::require_feature(f.variance, "variance");
        tag = "moment_variance";
        break;
      case MomentKind::Kurtosis:
        stat = detail::require_feature(f.kurtosis, "kurtosis");
        tag = "moment_kurtosis";
        break;
    }
    // Reuse the log2 mapping with the reference scale standing in for h_ref:
    // r = min(stat / scale, 1).
    CalibrationRef proxy_cal = CalibrationRef::legacy(p.reference_scale);
    ChunkDecision d = select_chunk(std::max(stat, 0.0), bounds_, proxy_cal);
    d.chunk = detail::snap_to_buckets(d.chunk, policy_.bucket_set);
    d.source_policy = tag;
    return d;
  }

  ChunkDecision decide_impl(const GuardedPolicy& p,
                            const ScheduleFeatures& f) {
    ChunkDecision inner = inner_->decide(f);
    const int delta =
        std::abs(log2_exact(static_cast<std::uint64_t>(inner.chunk)) -
                 log2_exact(static_cast<std::uint64_t>(p.safe_chunk)));
    if (delta >= p.min_delta_buckets) {
      inner.source_policy = "guarded[" + inner.source_policy + "]";
      return inner;
    }
    ChunkDecision d = inner;  // keep the inner signal for the trace
    d.chunk = p.safe_chunk;
    d.source_policy = "guarded[fallback]";
    return d;
  }

  ChunkDecision decide_impl(const LearnedTablePolicy& p,
                            const ScheduleFeatures& f) {
    const std::size_t seq_len = detail::require_feature(f.seq_len, "seq_len");
    // Strictly-shorter-than semantics: the threshold itself maps to long.
    const int chunk =
        seq_len < p.threshold_tokens ? p.short_chunk : p.long_chunk;
    return make(chunk, 0.0, "learned_table",
                static_cast<double>(seq_len));
  }

  SchedulerPolicy policy_;
  ChunkBounds bounds_;
  CalibrationRef cal_;
  std::optional<Rng> rng_;
  std::unique_ptr<Scheduler> inner_;
};

// One-shot decision; for the random variant this is the seeded stream's
// first draw.
inline ChunkDecision schedule(const SchedulerPolicy& policy,
                              const ScheduleFeatures& features,
                              const ChunkBounds& bounds,
                              const CalibrationRef& cal) {
  Scheduler s(policy, bounds, cal);
  return s.decide(features);
}

// ------------------------- adaptive thresholding ---------------------------

// tau_t = tau0 + rho * (h_t - h_min) / (h_max - h_min)
struct AdaptiveThreshold {
  double tau0 = 0.52;
  double rho = 0.0;
  double h_min = 0.0;
  double h_max = 0.0;  // typically log(K)
};

inline double adaptive_tau(const AdaptiveThreshold& state, double h_t) {
  if (!(state.h_max > state.h_min))
    throw invalid_input("adaptive threshold requires h_max > h_min");
  return state.tau0 +
         state.rho * (h_t - state.h_min) / (state.h_max - state.h_min);
}

}  // namespace chunklab
