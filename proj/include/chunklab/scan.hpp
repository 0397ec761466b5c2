#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chunklab/common.hpp"
#include "chunklab/rng.hpp"

namespace chunklab {

// ---------------------------------------------------------------------------
// Sequential selective-SSM recurrence with a diagonal A and d_state lanes
// per channel:
//
//   h_t(c,s) = a_t(c,s) * h_{t-1}(c,s) + b_t(s) * x_t(c)
//   y_t(c)   = sum_s c_t(s) * h_t(c,s) + d(c) * x_t(c)
//
// evaluated whole or in consecutive chunks that carry the state across
// window boundaries. Chunking only repartitions an order-preserved loop, so
// chunked outputs are bit-identical to the sequential pass.
// ---------------------------------------------------------------------------

struct ScanParams {
  std::size_t channels = 0;   // d
  std::size_t state_dim = 0;  // lanes per channel
  std::size_t seq_len = 0;    // L

  // a: size d*state (constant) or L*d*state laid out [t][c][s]
  // b, c: size state (constant) or L*state laid out [t][s]
  // d: size channels (per-channel passthrough)
  // x: size d*L laid out [c][t] (row-major (d, L))
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> d;
  std::vector<double> x;

  bool a_time_varying() const {
    return a.size() == seq_len * channels * state_dim;
  }
  bool b_time_varying() const { return b.size() == seq_len * state_dim; }
  bool c_time_varying() const { return c.size() == seq_len * state_dim; }
};

struct ScanState {
  std::vector<double> h;  // (channels, state_dim) row-major
};

struct ScanOutput {
  std::vector<double> y;  // (channels, seq_len) row-major
};

inline void validate_scan_params(const ScanParams& p) {
  if (p.channels == 0 || p.state_dim == 0 || p.seq_len == 0)
    throw invalid_input("shape mismatch");
  const std::size_t cs = p.channels * p.state_dim;
  if (p.a.size() != cs && p.a.size() != p.seq_len * cs)
    throw invalid_input("shape mismatch");
  if (p.b.size() != p.state_dim && p.b.size() != p.seq_len * p.state_dim)
    throw invalid_input("shape mismatch");
  if (p.c.size() != p.state_dim && p.c.size() != p.seq_len * p.state_dim)
    throw invalid_input("shape mismatch");
  if (p.d.size() != p.channels) throw invalid_input("shape mismatch");
  if (p.x.size() != p.channels * p.seq_len) throw invalid_input("shape mismatch");
  if (!all_finite(p.a) || !all_finite(p.b) || !all_finite(p.c) ||
      !all_finite(p.d) || !all_finite(p.x))
    throw invalid_input("non-finite input");
}

namespace detail {

// Core kernel: advances timesteps [t_begin, t_end), mutating the state and
// filling the matching output columns. Both the sequential and the chunked
// entry points funnel through this single loop so their evaluation order is
// identical by construction.
inline void scan_window(const ScanParams& p, std::size_t t_begin,
                        std::size_t t_end, std::vector<double>& h,
                        std::vector<double>& y) {
  const std::size_t n = p.state_dim;
  const bool at = p.a_time_varying();
  const bool bt = p.b_time_varying();
  const bool ct = p.c_time_varying();
  for (std::size_t t = t_begin; t < t_end; ++t) {
    const double* a_t = at ? &p.a[t * p.channels * n] : p.a.data();
    const double* b_t = bt ? &p.b[t * n] : p.b.data();
    const double* c_t = ct ? &p.c[t * n] : p.c.data();
    for (std::size_t c = 0; c < p.channels; ++c) {
      const double x_ct = p.x[c * p.seq_len + t];
      double* h_c = &h[c * n];
      const double* a_ct = &a_t[c * n];
      double out = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        h_c[s] = a_ct[s] * h_c[s] + b_t[s] * x_ct;
        out += c_t[s] * h_c[s];
      }
      y[c * p.seq_len + t] = out + p.d[c] * x_ct;
    }
  }
}

inline std::vector<double> initial_state(const ScanParams& p,
                                         const ScanState& h0) {
  if (h0.h.empty()) return std::vector<double>(p.channels * p.state_dim, 0.0);
  if (h0.h.size() != p.channels * p.state_dim)
    throw invalid_input("shape mismatch");
  if (!all_finite(h0.h)) throw invalid_input("non-finite input");
  return h0.h;
}

}  // namespace detail

inline std::pair<ScanOutput, ScanState> scan_sequential(const ScanParams& p,
                                                        const ScanState& h0) {
  validate_scan_params(p);
  std::vector<double> h = detail::initial_state(p, h0);
  ScanOutput out;
  out.y.assign(p.channels * p.seq_len, 0.0);
  detail::scan_window(p, 0, p.seq_len, h, out.y);
  return {std::move(out), ScanState{std::move(h)}};
}

inline std::pair<ScanOutput, ScanState> scan_chunked(const ScanParams& p,
                                                     const ScanState& h0,
                                                     std::size_t chunk) {
  validate_scan_params(p);
  if (chunk < 1) throw invalid_input("chunk must be >= 1");
  std::vector<double> h = detail::initial_state(p, h0);
  ScanOutput out;
  out.y.assign(p.channels * p.seq_len, 0.0);
  for (std::size_t t = 0; t < p.seq_len; t += chunk) {
    const std::size_t t_end = std::min(t + chunk, p.seq_len);
    detail::scan_window(p, t, t_end, h, out.y);
  }
  return {std::move(out), ScanState{std::move(h)}};
}

// Seeded benchmark parameters: decaying diagonal a in [0.5, 0.995] so long
// scans stay bounded, unit-scale b/c/x, small passthrough.
inline ScanParams random_scan_params(std::uint64_t seed, std::size_t channels,
                                     std::size_t state_dim,
                                     std::size_t seq_len,
                                     bool time_varying = true) {
  Rng rng(seed);
  ScanParams p;
  p.channels = channels;
  p.state_dim = state_dim;
  p.seq_len = seq_len;
  const std::size_t a_n =
      time_varying ? seq_len * channels * state_dim : channels * state_dim;
  const std::size_t bc_n = time_varying ? seq_len * state_dim : state_dim;
  p.a.resize(a_n);
  for (double& v : p.a) v = rng.uniform(0.5, 0.995);
  p.b.resize(bc_n);
  for (double& v : p.b) v = rng.normal();
  p.c.resize(bc_n);
  for (double& v : p.c) v = rng.normal() / std::sqrt(static_cast<double>(state_dim));
  p.d.resize(channels);
  for (double& v : p.d) v = 0.1 * rng.normal();
  p.x.resize(channels * seq_len);
  for (double& v : p.x) v = rng.normal();
  return p;
}

}  // namespace chunklab
