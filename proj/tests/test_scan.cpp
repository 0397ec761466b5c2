#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "chunklab/scan.hpp"
#include "chunklab/synthetic.hpp"

using namespace chunklab;

namespace {

// Independently coded naive reference: plain index arithmetic, same
// accumulation order as the contract (state lanes in order), no window
// machinery.
std::pair<std::vector<double>, std::vector<double>> naive_scan(
    const ScanParams& p) {
  const std::size_t d = p.channels, n = p.state_dim, L = p.seq_len;
  std::vector<double> h(d * n, 0.0);
  std::vector<double> y(d * L, 0.0);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t c = 0; c < d; ++c) {
      for (std::size_t s = 0; s < n; ++s) {
        const double a = p.a_time_varying() ? p.a[(t * d + c) * n + s]
                                            : p.a[c * n + s];
        const double b = p.b_time_varying() ? p.b[t * n + s] : p.b[s];
        h[c * n + s] = a * h[c * n + s] + b * p.x[c * L + t];
      }
      double out = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const double cc = p.c_time_varying() ? p.c[t * n + s] : p.c[s];
        out += cc * h[c * n + s];
      }
      y[c * L + t] = out + p.d[c] * p.x[c * L + t];
    }
  }
  return {y, h};
}

}  // namespace

TEST_CASE("memoryless limit: a=0, d=0 gives y_t = c (b x_t)") {
  ScanParams p;
  p.channels = 3;
  p.state_dim = 2;
  p.seq_len = 5;
  p.a.assign(p.channels * p.state_dim, 0.0);
  p.b = {0.5, -1.5};
  p.c = {2.0, 1.0};
  p.d.assign(p.channels, 0.0);
  p.x.resize(p.channels * p.seq_len);
  Rng rng(3);
  for (double& v : p.x) v = rng.normal();

  const auto [out, state] = scan_sequential(p, ScanState{});
  const double gain = 2.0 * 0.5 + 1.0 * -1.5;  // c . b
  for (std::size_t c = 0; c < p.channels; ++c)
    for (std::size_t t = 0; t < p.seq_len; ++t)
      CHECK(out.y[c * p.seq_len + t] ==
            Catch::Approx(gain * p.x[c * p.seq_len + t]).margin(1e-15));
  (void)state;
}

TEST_CASE("prefix-sum identity: a=b=c=1, d=0, unit inputs give y_t = t") {
  ScanParams p;
  p.channels = 2;
  p.state_dim = 1;
  p.seq_len = 16;
  p.a.assign(p.channels, 1.0);
  p.b = {1.0};
  p.c = {1.0};
  p.d.assign(p.channels, 0.0);
  p.x.assign(p.channels * p.seq_len, 1.0);

  const auto [out, state] = scan_sequential(p, ScanState{});
  for (std::size_t c = 0; c < p.channels; ++c)
    for (std::size_t t = 0; t < p.seq_len; ++t)
      CHECK(out.y[c * p.seq_len + t] == static_cast<double>(t + 1));
  CHECK(state.h[0] == 16.0);
}

TEST_CASE("random params match the independent naive loop bit-exactly") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const ScanParams p = random_scan_params(seed, 8, 4, 64);
    const auto [out, state] = scan_sequential(p, ScanState{});
    const auto [ref_y, ref_h] = naive_scan(p);
    CHECK(out.y == ref_y);
    CHECK(state.h == ref_h);
  }
  // Constant-coefficient layout too.
  const ScanParams p = random_scan_params(9, 8, 4, 64, /*time_varying=*/false);
  const auto [out, state] = scan_sequential(p, ScanState{});
  const auto [ref_y, ref_h] = naive_scan(p);
  CHECK(out.y == ref_y);
  CHECK(state.h == ref_h);
}

TEST_CASE("chunked execution is bit-identical to sequential") {
  const ScanParams p = random_scan_params(42, 16, 8, 1000);
  const auto [ref, ref_state] = scan_sequential(p, ScanState{});

  // chunk >= L: single window.
  const auto [whole, whole_state] = scan_chunked(p, ScanState{}, 4096);
  CHECK(whole.y == ref.y);
  CHECK(whole_state.h == ref_state.h);

  // chunk = 1: per-timestep windows.
  const auto [steps, steps_state] = scan_chunked(p, ScanState{}, 1);
  CHECK(steps.y == ref.y);
  CHECK(steps_state.h == ref_state.h);

  // Window sizes that do and do not divide L.
  for (std::size_t chunk : {3ULL, 32ULL, 64ULL, 128ULL, 333ULL}) {
    const auto [out, state] = scan_chunked(p, ScanState{}, chunk);
    CHECK(out.y == ref.y);
    CHECK(state.h == ref_state.h);
  }
}

TEST_CASE("state handoff composes across an arbitrary split") {
  const ScanParams p = random_scan_params(7, 4, 4, 128);
  const auto [ref, ref_state] = scan_sequential(p, ScanState{});
  for (std::size_t split : {1ULL, 17ULL, 64ULL, 127ULL}) {
    // Run [0, split) then [split, L) by slicing the inputs.
    ScanParams first = p;
    first.seq_len = split;
    first.a.assign(p.a.begin(),
                   p.a.begin() + static_cast<std::ptrdiff_t>(
                                     split * p.channels * p.state_dim));
    first.b.assign(p.b.begin(),
                   p.b.begin() + static_cast<std::ptrdiff_t>(split * p.state_dim));
    first.c.assign(p.c.begin(),
                   p.c.begin() + static_cast<std::ptrdiff_t>(split * p.state_dim));
    first.x.resize(p.channels * split);
    for (std::size_t c = 0; c < p.channels; ++c)
      for (std::size_t t = 0; t < split; ++t)
        first.x[c * split + t] = p.x[c * p.seq_len + t];

    ScanParams second = p;
    const std::size_t rest = p.seq_len - split;
    second.seq_len = rest;
    second.a.assign(p.a.begin() + static_cast<std::ptrdiff_t>(
                                      split * p.channels * p.state_dim),
                    p.a.end());
    second.b.assign(
        p.b.begin() + static_cast<std::ptrdiff_t>(split * p.state_dim),
        p.b.end());
    second.c.assign(
        p.c.begin() + static_cast<std::ptrdiff_t>(split * p.state_dim),
        p.c.end());
    second.x.resize(p.channels * rest);
    for (std::size_t c = 0; c < p.channels; ++c)
      for (std::size_t t = 0; t < rest; ++t)
        second.x[c * rest + t] = p.x[c * p.seq_len + split + t];

    const auto [y1, h1] = scan_sequential(first, ScanState{});
    const auto [y2, h2] = scan_sequential(second, h1);
    CHECK(h2.h == ref_state.h);
    for (std::size_t c = 0; c < p.channels; ++c) {
      for (std::size_t t = 0; t < split; ++t)
        CHECK(y1.y[c * split + t] == ref.y[c * p.seq_len + t]);
      for (std::size_t t = 0; t < rest; ++t)
        CHECK(y2.y[c * rest + t] == ref.y[c * p.seq_len + split + t]);
    }
  }
}

TEST_CASE("determinism: identical seeds give identical outputs") {
  const ScanParams a = random_scan_params(1234, 8, 4, 256);
  const ScanParams b = random_scan_params(1234, 8, 4, 256);
  CHECK(a.x == b.x);
  const auto [ya, sa] = scan_sequential(a, ScanState{});
  const auto [yb, sb] = scan_sequential(b, ScanState{});
  CHECK(ya.y == yb.y);
  CHECK(sa.h == sb.h);
}

TEST_CASE("scan error paths") {
  ScanParams p = random_scan_params(1, 4, 2, 8);
  CHECK_THROWS_AS(scan_chunked(p, ScanState{}, 0), invalid_input);
  ScanParams bad = p;
  bad.x.pop_back();
  CHECK_THROWS_WITH(scan_sequential(bad, ScanState{}), "shape mismatch");
  ScanParams nonfinite = p;
  nonfinite.x[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH(scan_sequential(nonfinite, ScanState{}),
                    "non-finite input");
  ScanState wrong_state;
  wrong_state.h.assign(3, 0.0);
  CHECK_THROWS_WITH(scan_sequential(p, wrong_state), "shape mismatch");
}

TEST_CASE("uniform generator reproduces the perturbation fixture entropy") {
  SyntheticSpec syn;
  syn.distribution = Distribution::Uniform;
  syn.seed = 8;
  syn.shape = {1000000};
  HistogramSpec spec;
  spec.bin_count = 256;
  const EntropyEstimate e =
      estimate_tensor_entropy(generate_activations(syn), spec);
  CHECK(e.raw_nats == Catch::Approx(5.545).margin(0.01));
}
