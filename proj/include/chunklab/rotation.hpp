#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "chunklab/common.hpp"
#include "chunklab/entropy.hpp"

namespace chunklab {

// ---------------------------------------------------------------------------
// Walsh-Hadamard rotation analysis and the histogram-majorization machinery:
// the orthonormal fast transform (Sylvester ordering, entries +/-1/sqrt(d)),
// pre/post rotation entropy reports, doubly-stochastic histogram mixing with
// the Jensen entropy inequality, the exact prefix-sum majorization test, and
// a Sinkhorn fit of a Gaussian-on-bin-index kernel.
// ---------------------------------------------------------------------------

// In-place orthonormal FWHT. Unnormalized butterflies followed by a single
// 1/sqrt(d) scale; with Sylvester ordering the first output row is all
// +1/sqrt(d), so a constant input concentrates exactly into coordinate 0.
inline void fwht_inplace(std::span<double> x) {
  const std::size_t d = x.size();
  if (d == 0 || !is_power_of_two(d))
    throw invalid_input("fwht length must be a power of two");
  for (std::size_t h = 1; h < d; h <<= 1) {
    for (std::size_t i = 0; i < d; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = x[j];
        const double b = x[j + h];
        x[j] = a + b;
        x[j + h] = a - b;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& v : x) v *= scale;
}

inline std::vector<double> fwht(std::vector<double> x) {
  fwht_inplace(x);
  return x;
}

// Plain Shannon entropy of a mass vector in nats, no epsilon term. The
// majorization analysis uses this form rather than the stabilized estimator.
inline double shannon_entropy(std::span<const double> masses) {
  double h = 0.0;
  for (double p : masses) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

struct RotationReport {
  double pre_entropy = 0.0;   // nats, fixed-bin over the dynamic range
  double post_entropy = 0.0;
  double delta = 0.0;         // post - pre
  double peak_pre = 0.0;      // l-infinity
  double peak_post = 0.0;
  double l2_pre = 0.0;
  double l2_post = 0.0;
  double dc_coordinate = 0.0;  // first post-rotation coordinate, ~ sqrt(d)*mu
  std::vector<double> pre_masses;
  std::vector<double> post_masses;
};

inline RotationReport rotation_report(std::span<const double> x,
                                      const HistogramSpec& spec) {
  std::vector<double> pre(x.begin(), x.end());
  std::vector<double> post = fwht(pre);

  auto linf = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double t : v) m = std::max(m, std::fabs(t));
    return m;
  };
  auto l2 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double t : v) s += t * t;
    return std::sqrt(s);
  };

  Histogram hp = compute_histogram(std::span<const double>(pre), spec);
  Histogram hq = compute_histogram(std::span<const double>(post), spec);

  RotationReport r;
  r.pre_entropy = estimate_entropy(hp, spec.epsilon).raw_nats;
  r.post_entropy = estimate_entropy(hq, spec.epsilon).raw_nats;
  r.delta = r.post_entropy - r.pre_entropy;
  r.peak_pre = linf(pre);
  r.peak_post = linf(post);
  r.l2_pre = l2(pre);
  r.l2_post = l2(post);
  r.dc_coordinate = post[0];
  r.pre_masses = std::move(hp.masses);
  r.post_masses = std::move(hq.masses);
  return r;
}

// ------------------------------ majorization -------------------------------

struct SimplexVector {
  std::vector<double> masses;

  std::size_t size() const { return masses.size(); }
};

inline void validate_simplex(const SimplexVector& v, double tol = 1e-10) {
  if (v.masses.empty()) throw invalid_input("empty mass vector");
  double sum = 0.0;
  for (double p : v.masses) {
    if (!(p >= 0.0)) throw invalid_input("negative mass");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > tol) throw invalid_input("masses must sum to 1");
}

struct MixingMatrix {
  std::size_t dim = 0;
  std::vector<double> entries;  // row-major dim x dim, non-negative
  double row_err = 0.0;         // max |row sum - 1|
  double col_err = 0.0;         // max |col sum - 1|

  double at(std::size_t i, std::size_t j) const {
    return entries[i * dim + j];
  }
};

inline void recompute_marginal_errors(MixingMatrix& b) {
  double row_err = 0.0;
  double col_err = 0.0;
  std::vector<double> col_sums(b.dim, 0.0);
  for (std::size_t i = 0; i < b.dim; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < b.dim; ++j) {
      const double e = b.at(i, j);
      row_sum += e;
      col_sums[j] += e;
    }
    row_err = std::max(row_err, std::fabs(row_sum - 1.0));
  }
  for (double s : col_sums) col_err = std::max(col_err, std::fabs(s - 1.0));
  b.row_err = row_err;
  b.col_err = col_err;
}

// q = B p. B must be doubly stochastic within 1e-8 (recomputed here, not
// trusted from the declared fields). The raw product is returned without
// renormalization.
inline SimplexVector mix_histogram(const SimplexVector& p,
                                   const MixingMatrix& b) {
  if (b.dim == 0 || b.entries.size() != b.dim * b.dim)
    throw invalid_input("dimension mismatch");
  if (p.size() != b.dim) throw invalid_input("dimension mismatch");
  MixingMatrix check = b;
  recompute_marginal_errors(check);
  for (double e : b.entries)
    if (!(e >= 0.0)) throw invalid_input("mixing matrix entries must be >= 0");
  if (check.row_err > 1e-8 || check.col_err > 1e-8)
    throw invalid_input("matrix is not doubly stochastic within 1e-8");

  SimplexVector q;
  q.masses.assign(b.dim, 0.0);
  for (std::size_t i = 0; i < b.dim; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < b.dim; ++j) acc += b.at(i, j) * p.masses[j];
    q.masses[i] = acc;
  }
  return q;
}

struct MajorizationVerdict {
  bool majorized = false;        // q is majorized by p (q = Bp is attainable)
  double max_prefix_excess = 0.0;  // largest prefix(q) - prefix(p)
  double total_gap = 0.0;          // |sum q - sum p|
};

// Hardy-Littlewood-Polya test: sort both descending and compare prefix sums.
// A true verdict certifies the existence of a doubly-stochastic B with
// q = Bp.
inline MajorizationVerdict check_majorization(const SimplexVector& q,
                                              const SimplexVector& p,
                                              double tol = 1e-10) {
  if (q.size() != p.size() || q.size() == 0)
    throw invalid_input("dimension mismatch");
  std::vector<double> qs = q.masses;
  std::vector<double> ps = p.masses;
  std::sort(qs.begin(), qs.end(), std::greater<double>());
  std::sort(ps.begin(), ps.end(), std::greater<double>());

  MajorizationVerdict v;
  double q_prefix = 0.0;
  double p_prefix = 0.0;
  double max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < qs.size(); ++k) {
    q_prefix += qs[k];
    p_prefix += ps[k];
    max_excess = std::max(max_excess, q_prefix - p_prefix);
  }
  v.max_prefix_excess = max_excess;
  v.total_gap = std::fabs(q_prefix - p_prefix);
  v.majorized = max_excess <= tol && v.total_gap <= tol;
  return v;
}

// ------------------------------- Sinkhorn ----------------------------------

struct SinkhornResult {
  MixingMatrix matrix;
  double residual_l1 = 0.0;  // ||q - Bp||_1 for the fitted B
  bool converged = false;
  std::size_t iterations = 0;
};

// Projects the positive kernel K_ij = exp(-(i-j)^2 / (2 bandwidth^2)) over
// bin indices to an approximately doubly-stochastic matrix by alternating
// row and column normalization, then reports ||q - Bp||_1. Non-convergence
// within max_iters is reported through the flag, not an error.
inline SinkhornResult sinkhorn_fit(const SimplexVector& p,
                                   const SimplexVector& q, double bandwidth,
                                   std::size_t max_iters = 1000,
                                   double tol = 1e-12) {
  if (p.size() != q.size() || p.size() == 0)
    throw invalid_input("dimension mismatch");
  if (!(bandwidth > 0.0)) throw invalid_input("bandwidth must be positive");

  const std::size_t m = p.size();
  MixingMatrix b;
  b.dim = m;
  b.entries.resize(m * m);
  const double inv_two_bw2 = 1.0 / (2.0 * bandwidth * bandwidth);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      b.entries[i * m + j] = std::exp(-d * d * inv_two_bw2);
    }
  }

  SinkhornResult result;
  for (std::size_t it = 0; it < max_iters; ++it) {
    // Row pass.
    for (std::size_t i = 0; i < m; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) sum += b.entries[i * m + j];
      const double inv = 1.0 / sum;
      for (std::size_t j = 0; j < m; ++j) b.entries[i * m + j] *= inv;
    }
    // Column pass.
    for (std::size_t j = 0; j < m; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < m; ++i) sum += b.entries[i * m + j];
      const double inv = 1.0 / sum;
      for (std::size_t i = 0; i < m; ++i) b.entries[i * m + j] *= inv;
    }
    result.iterations = it + 1;
    recompute_marginal_errors(b);
    if (b.row_err <= tol && b.col_err <= tol) {
      result.converged = true;
      break;
    }
  }

  double residual = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += b.entries[i * m + j] * p.masses[j];
    residual += std::fabs(q.masses[i] - acc);
  }
  result.matrix = std::move(b);
  result.residual_l1 = residual;
  return result;
}

}  // namespace chunklab
