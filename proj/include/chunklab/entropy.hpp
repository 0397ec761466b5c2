#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "chunklab/common.hpp"

namespace chunklab {

// ---------------------------------------------------------------------------
// Fixed-bin histogram construction and Shannon entropy estimation over
// activation tensors:
//
//   H_hat = -sum_k p_k * log(p_k + eps)        (natural log, "raw nats")
//   H_tilde = H_hat / log(K)                   (normalized by the bin ceiling)
//
// plus stride subsampling, per-position ("token") averaging, and EMA
// smoothing of a stream of estimates.
// ---------------------------------------------------------------------------

// Flat value buffer plus a shape descriptor (e.g. {channels, length}).
// The flattened storage order is row-major in the given shape.
struct ActivationTensor {
  std::vector<double> values;
  std::vector<std::size_t> shape;

  std::size_t size() const { return values.size(); }
};

inline void validate_tensor(const ActivationTensor& t) {
  std::size_t n = 1;
  if (t.shape.empty()) throw invalid_input("empty shape");
  for (std::size_t e : t.shape) {
    if (e == 0) throw invalid_input("zero shape extent");
    n *= e;
  }
  if (n != t.values.size()) throw invalid_input("shape/value count mismatch");
  if (!all_finite(t.values)) throw invalid_input("non-finite input");
}

enum class RangeMode { Dynamic, Fixed };

struct HistogramSpec {
  int bin_count = 256;
  double epsilon = 1e-8;
  RangeMode range_mode = RangeMode::Dynamic;
  double fixed_lo = 0.0;  // used only in Fixed mode
  double fixed_hi = 0.0;
  std::size_t sample_stride = 1;
};

inline void validate_spec(const HistogramSpec& s) {
  if (s.bin_count < 2) throw invalid_input("degenerate spec");
  if (!(s.epsilon > 0.0)) throw invalid_input("epsilon must be positive");
  if (s.sample_stride < 1) throw invalid_input("stride must be >= 1");
  if (s.range_mode == RangeMode::Fixed && !(s.fixed_lo < s.fixed_hi))
    throw invalid_input("fixed range requires lo < hi");
}

struct Histogram {
  std::vector<double> masses;  // length K, sums to 1 for non-empty input
  double lo = 0.0;
  double hi = 0.0;
  std::size_t sample_count = 0;

  int bin_count() const { return static_cast<int>(masses.size()); }
};

struct EntropyEstimate {
  double raw_nats = 0.0;
  double normalized = 0.0;  // raw_nats / log(K)
  int bin_count = 0;
  double epsilon = 0.0;
  std::size_t sample_stride = 1;
  std::size_t sample_count = 0;
};

namespace detail {

// Bin index for value v over [lo, hi]: floor((v-lo)/(hi-lo)*K), clamped so
// the maximum lands in the last bin and out-of-range values (Fixed mode)
// clip to the edge bins.
inline int bin_index(double v, double lo, double hi, int k) {
  const double width = hi - lo;
  if (!(width > 0.0)) return 0;  // degenerate range: all mass in bin 0
  int idx = static_cast<int>(std::floor((v - lo) / width * k));
  if (idx < 0) idx = 0;
  if (idx >= k) idx = k - 1;
  return idx;
}

}  // namespace detail

// Histogram of the stride-subsampled values. Subsampling takes every
// stride-th element of the flattened tensor in storage order, and both the
// dynamic range and the counts are computed from the subsample.
inline Histogram compute_histogram(std::span<const double> values,
                                   const HistogramSpec& spec) {
  validate_spec(spec);
  const std::size_t stride = spec.sample_stride;
  std::size_t n = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); i += stride) {
    const double v = values[i];
    if (!std::isfinite(v)) throw invalid_input("non-finite input");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++n;
  }
  if (n == 0) throw invalid_input("no samples");
  if (spec.range_mode == RangeMode::Fixed) {
    lo = spec.fixed_lo;
    hi = spec.fixed_hi;
  }

  const int k = spec.bin_count;
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < values.size(); i += stride) {
    ++counts[static_cast<std::size_t>(
        detail::bin_index(values[i], lo, hi, k))];
  }

  Histogram h;
  h.masses.resize(static_cast<std::size_t>(k));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int b = 0; b < k; ++b)
    h.masses[static_cast<std::size_t>(b)] =
        static_cast<double>(counts[static_cast<std::size_t>(b)]) * inv_n;
  h.lo = lo;
  h.hi = hi;
  h.sample_count = n;
  return h;
}

inline Histogram compute_histogram(const ActivationTensor& tensor,
                                   const HistogramSpec& spec) {
  if (tensor.values.empty()) throw invalid_input("no samples");
  validate_tensor(tensor);
  return compute_histogram(std::span<const double>(tensor.values), spec);
}

// Raw/normalized entropy of a histogram. Zero-mass bins contribute exactly
// zero (the p_k factor), so the sum runs over occupied bins only.
inline EntropyEstimate estimate_entropy(const Histogram& hist, double epsilon) {
  const int k = hist.bin_count();
  if (k < 2) throw invalid_input("degenerate spec");
  if (!(epsilon > 0.0)) throw invalid_input("epsilon must be positive");
  double raw = 0.0;
  for (double p : hist.masses) {
    if (p > 0.0) raw -= p * std::log(p + epsilon);
  }
  EntropyEstimate e;
  e.raw_nats = raw;
  e.normalized = raw / std::log(static_cast<double>(k));
  e.bin_count = k;
  e.epsilon = epsilon;
  e.sample_count = hist.sample_count;
  return e;
}

// Convenience: histogram + entropy in one call, carrying the stride through
// to the emitted record.
inline EntropyEstimate estimate_tensor_entropy(const ActivationTensor& tensor,
                                               const HistogramSpec& spec) {
  EntropyEstimate e = estimate_entropy(compute_histogram(tensor, spec),
                                       spec.epsilon);
  e.sample_stride = spec.sample_stride;
  return e;
}

// Token-level estimate: the tensor is read as (channels..., length) with the
// last axis as sequence positions; one histogram is computed per position
// over that position's channel values (stride applied within the slice) and
// the per-position raw entropies are averaged.
inline EntropyEstimate token_entropy(const ActivationTensor& tensor,
                                     const HistogramSpec& spec) {
  validate_tensor(tensor);
  validate_spec(spec);
  if (tensor.shape.size() < 2)
    throw invalid_input("token entropy needs a (channels, length) tensor");
  const std::size_t length = tensor.shape.back();
  const std::size_t channels = tensor.values.size() / length;

  std::vector<double> slice;
  slice.reserve(channels);
  double raw_sum = 0.0;
  std::size_t samples = 0;
  for (std::size_t t = 0; t < length; ++t) {
    slice.clear();
    for (std::size_t c = 0; c < channels; ++c)
      slice.push_back(tensor.values[c * length + t]);
    Histogram h = compute_histogram(std::span<const double>(slice), spec);
    raw_sum += estimate_entropy(h, spec.epsilon).raw_nats;
    samples += h.sample_count;
  }

  EntropyEstimate e;
  e.raw_nats = raw_sum / static_cast<double>(length);
  e.normalized = e.raw_nats / std::log(static_cast<double>(spec.bin_count));
  e.bin_count = spec.bin_count;
  e.epsilon = spec.epsilon;
  e.sample_stride = spec.sample_stride;
  e.sample_count = samples;
  return e;
}

// Exponential moving average of a stream of per-batch entropies:
//   H_t = decay * H_{t-1} + (1 - decay) * H_new
struct EmaState {
  double current = 0.0;
  double decay = 0.85;
  std::uint64_t update_count = 0;
};

inline EmaState update_ema(const EmaState& state, double new_h) {
  if (!(state.decay >= 0.0 && state.decay < 1.0))
    throw invalid_input("ema decay must lie in [0,1)");
  EmaState next = state;
  next.current = state.decay * state.current + (1.0 - state.decay) * new_h;
  next.update_count = state.update_count + 1;
  return next;
}

}  // namespace chunklab
