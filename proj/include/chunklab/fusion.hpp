#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "chunklab/common.hpp"
#include "chunklab/rng.hpp"

namespace chunklab {

// ---------------------------------------------------------------------------
// Entropy-regularized operator fusion. A plan partitions an operator chain
// into contiguous regions; each region's utility is
//
//   U(R) = alpha * H(R) + beta * AI(R) - gamma * M(R)
//
// where H(R) is the entry entropy of the region's first operator and AI/M
// accumulate additively. Feasibility is a three-predicate budget check
// (shared memory, registers, occupancy). The exact solver is an O(n^2)
// dynamic program with predecessor backtracking; a thresholded greedy
// variant grows regions left to right.
// ---------------------------------------------------------------------------

struct OperatorDesc {
  double entry_entropy = 0.0;        // nats entering this operator
  double arithmetic_intensity = 0.0;
  double memory_traffic = 0.0;       // bytes-per-token surrogate
  double shared_mem_cost = 0.0;      // budget units
  double register_cost = 0.0;
};

struct OperatorChain {
  std::vector<OperatorDesc> ops;

  std::size_t size() const { return ops.size(); }
};

inline void validate_chain(const OperatorChain& chain) {
  if (chain.ops.empty()) throw invalid_input("operator chain must be non-empty");
  for (const auto& op : chain.ops) {
    const double fields[] = {op.entry_entropy, op.arithmetic_intensity,
                             op.memory_traffic, op.shared_mem_cost,
                             op.register_cost};
    for (double f : fields)
      if (!(f >= 0.0) || !std::isfinite(f))
        throw invalid_input("operator costs must be finite and non-negative");
  }
}

struct ResourceBudget {
  double shared_mem_budget = 48.0;  // M_shared
  double register_budget = 256.0;   // R_max
  double min_occupancy = 0.0;       // in [0,1]; 0 disables the predicate
  double tile_cost = 16.0;          // homogeneous per-operator C_tile
};

inline void validate_budget(const ResourceBudget& b) {
  if (!(b.shared_mem_budget > 0.0) || !(b.register_budget > 0.0) ||
      !(b.tile_cost > 0.0))
    throw invalid_input("budgets must be positive");
  if (!(b.min_occupancy >= 0.0 && b.min_occupancy <= 1.0))
    throw invalid_input("min_occupancy must lie in [0,1]");
}

struct FusionWeights {
  double alpha = 0.45;
  double beta = 0.35;
  double gamma = 0.20;
  double tau = 0.52;
};

// Half-open span [begin, end) of chain indices.
struct Region {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
};

struct FusionPlan {
  std::vector<Region> regions;  // contiguous, covering [0, n) in order
  double total_utility = 0.0;

  std::size_t launch_count() const { return regions.size(); }
};

namespace detail {

inline void validate_span(const OperatorChain& chain, Region r) {
  if (r.begin >= r.end || r.end > chain.size())
    throw invalid_input("invalid region span");
}

}  // namespace detail

inline double region_utility(const OperatorChain& chain, Region r,
                             const FusionWeights& w) {
  detail::validate_span(chain, r);
  const double h = chain.ops[r.begin].entry_entropy;
  double ai = 0.0;
  double mem = 0.0;
  for (std::size_t i = r.begin; i < r.end; ++i) {
    ai += chain.ops[i].arithmetic_intensity;
    mem += chain.ops[i].memory_traffic;
  }
  return w.alpha * h + w.beta * ai - w.gamma * mem;
}

// Default occupancy model: min(1, M_shared / sum C). min_occupancy = 0
// disables the predicate entirely.
inline double region_occupancy(double shared_sum, double shared_budget) {
  constexpr double kTiny = 1e-12;
  return std::min(1.0, shared_budget / std::max(shared_sum, kTiny));
}

inline bool feasible(const OperatorChain& chain, Region r,
                     const ResourceBudget& budget) {
  detail::validate_span(chain, r);
  double shared = 0.0;
  double regs = 0.0;
  for (std::size_t i = r.begin; i < r.end; ++i) {
    shared += chain.ops[i].shared_mem_cost;
    regs += chain.ops[i].register_cost;
  }
  if (shared > budget.shared_mem_budget) return false;
  if (regs > budget.register_budget) return false;
  return region_occupancy(shared, budget.shared_mem_budget) >=
         budget.min_occupancy;
}

namespace detail {

inline void require_singletons_feasible(const OperatorChain& chain,
                                        const ResourceBudget& budget) {
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!feasible(chain, Region{i, i + 1}, budget))
      throw invalid_input("unfusable operator " + std::to_string(i + 1));
  }
}

}  // namespace detail

// Exact solver: DP[i] = max over j < i of DP[j] + U(R_{j+1..i}) restricted to
// feasible transitions, with recorded predecessors for backtracking.
inline FusionPlan solve_dp(const OperatorChain& chain, const FusionWeights& w,
                           const ResourceBudget& budget) {
  validate_chain(chain);
  validate_budget(budget);
  detail::require_singletons_feasible(chain, budget);

  const std::size_t n = chain.size();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> dp(n + 1, kNegInf);
  std::vector<std::size_t> prev(n + 1, 0);
  dp[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Region r{j, i};
      if (!feasible(chain, r, budget)) continue;
      const double cand = dp[j] + region_utility(chain, r, w);
      if (cand > dp[i]) {
        dp[i] = cand;
        prev[i] = j;
      }
    }
  }

  FusionPlan plan;
  plan.total_utility = dp[n];
  std::size_t i = n;
  while (i > 0) {
    plan.regions.push_back(Region{prev[i], i});
    i = prev[i];
  }
  std::reverse(plan.regions.begin(), plan.regions.end());
  return plan;
}

// Normalized score used by the greedy threshold: entropy over a ceiling
// (log K of the estimator that produced it), AI and M over the largest
// per-operator value in the chain, so tau values like 0.52 stay meaningful
// on unit-free chains.
inline double normalized_region_score(const OperatorChain& chain, Region r,
                                      const FusionWeights& w,
                                      double entropy_ceiling_nats) {
  detail::validate_span(chain, r);
  double ai_max = 0.0;
  double m_max = 0.0;
  for (const auto& op : chain.ops) {
    ai_max = std::max(ai_max, op.arithmetic_intensity);
    m_max = std::max(m_max, op.memory_traffic);
  }
  const double h = chain.ops[r.begin].entry_entropy;
  double ai = 0.0;
  double mem = 0.0;
  for (std::size_t i = r.begin; i < r.end; ++i) {
    ai += chain.ops[i].arithmetic_intensity;
    mem += chain.ops[i].memory_traffic;
  }
  const double h_term = entropy_ceiling_nats > 0.0 ? h / entropy_ceiling_nats : 0.0;
  const double ai_term = ai_max > 0.0 ? ai / ai_max : 0.0;
  const double m_term = m_max > 0.0 ? mem / m_max : 0.0;
  return w.alpha * h_term + w.beta * ai_term - w.gamma * m_term;
}

// Greedy left-to-right variant: extend the open region while the extended
// candidate stays feasible and its normalized score clears tau; otherwise
// close it and start a new region at the next operator.
inline FusionPlan solve_greedy_threshold(
    const OperatorChain& chain, const FusionWeights& w,
    const ResourceBudget& budget,
    double entropy_ceiling_nats = 4.1588830833596715 /* log 64 */) {
  validate_chain(chain);
  validate_budget(budget);
  detail::require_singletons_feasible(chain, budget);

  const std::size_t n = chain.size();
  FusionPlan plan;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n) {
      plan.regions.push_back(Region{begin, n});
      break;
    }
    const Region extended{begin, i + 1};
    const bool grow =
        feasible(chain, extended, budget) &&
        normalized_region_score(chain, extended, w, entropy_ceiling_nats) >=
            w.tau;
    if (!grow) {
      plan.regions.push_back(Region{begin, i});
      begin = i;
    }
  }
  plan.total_utility = 0.0;
  for (Region r : plan.regions) plan.total_utility += region_utility(chain, r, w);
  return plan;
}

// Static baseline: fixed fusion groups of `group_size` operators; a trailing
// short group closes as its own region.
inline FusionPlan static_fusion(const OperatorChain& chain,
                                const FusionWeights& w,
                                std::size_t group_size) {
  validate_chain(chain);
  if (group_size < 1) throw invalid_input("group size must be >= 1");
  FusionPlan plan;
  const std::size_t n = chain.size();
  for (std::size_t begin = 0; begin < n; begin += group_size)
    plan.regions.push_back(Region{begin, std::min(begin + group_size, n)});
  plan.total_utility = 0.0;
  for (Region r : plan.regions) plan.total_utility += region_utility(chain, r, w);
  return plan;
}

// Dispatch-cost surrogate: launches * per-call milliseconds.
inline double surrogate_dispatch_latency(std::size_t launch_count,
                                         double per_call_ms) {
  if (launch_count == 0) throw invalid_input("launch count must be positive");
  if (!(per_call_ms >= 0.0)) throw invalid_input("per-call cost must be >= 0");
  return static_cast<double>(launch_count) * per_call_ms;
}

// ------------------------- synthetic chain regimes -------------------------

enum class EntropyRegime { Low, Mixed, High };

inline const char* regime_name(EntropyRegime r) {
  switch (r) {
    case EntropyRegime::Low: return "low";
    case EntropyRegime::Mixed: return "mixed";
    case EntropyRegime::High: return "high";
  }
  return "?";
}

inline EntropyRegime parse_regime(const std::string& name) {
  if (name == "low") return EntropyRegime::Low;
  if (name == "mixed") return EntropyRegime::Mixed;
  if (name == "high") return EntropyRegime::High;
  throw invalid_input("unknown regime: " + name);
}

// Per-operator entry entropies drawn uniformly from the regime band
// (low 1.5-1.9, mixed 2.0-2.8, high 3.5-4.6 nats); AI/M/C/R from fixed
// unit-scale ranges.
inline OperatorChain random_chain(Rng& rng, std::size_t n,
                                  EntropyRegime regime) {
  double h_lo = 2.0, h_hi = 2.8;
  switch (regime) {
    case EntropyRegime::Low: h_lo = 1.5; h_hi = 1.9; break;
    case EntropyRegime::Mixed: h_lo = 2.0; h_hi = 2.8; break;
    case EntropyRegime::High: h_lo = 3.5; h_hi = 4.6; break;
  }
  OperatorChain chain;
  chain.ops.resize(n);
  for (auto& op : chain.ops) {
    op.entry_entropy = rng.uniform(h_lo, h_hi);
    op.arithmetic_intensity = rng.uniform(0.2, 2.0);
    op.memory_traffic = rng.uniform(0.1, 1.5);
    op.shared_mem_cost = rng.uniform(4.0, 20.0);
    op.register_cost = rng.uniform(8.0, 48.0);
  }
  return chain;
}

}  // namespace chunklab
