#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chunklab/common.hpp"
#include "chunklab/entropy.hpp"
#include "chunklab/rng.hpp"

namespace chunklab {

// Synthetic activation generators for the perturbation-sweep distributions.
// All draws are deterministic for a given seed; sparse picks its nonzero
// positions from a derived mask stream and its values from the same value
// stream as standard_normal, so sparse(1.0) reproduces standard_normal
// bit-for-bit.

enum class Distribution { Uniform, StandardNormal, Laplace, Sparse };

struct SyntheticSpec {
  Distribution distribution = Distribution::StandardNormal;
  double laplace_scale = 1.0;
  double nonzero_fraction = 1.0;  // sparse only, in (0, 1]
  std::uint64_t seed = 0;
  std::vector<std::size_t> shape = {1};
};

inline ActivationTensor generate_activations(const SyntheticSpec& spec) {
  std::size_t n = 1;
  if (spec.shape.empty()) throw invalid_input("empty shape");
  for (std::size_t e : spec.shape) {
    if (e == 0) throw invalid_input("zero shape extent");
    n *= e;
  }

  ActivationTensor t;
  t.shape = spec.shape;
  t.values.resize(n);

  Rng values(spec.seed);
  switch (spec.distribution) {
    case Distribution::Uniform:
      for (double& v : t.values) v = values.uniform();
      break;
    case Distribution::StandardNormal:
      for (double& v : t.values) v = values.normal();
      break;
    case Distribution::Laplace:
      if (!(spec.laplace_scale > 0.0))
        throw invalid_input("laplace scale must be positive");
      for (double& v : t.values) v = values.laplace(spec.laplace_scale);
      break;
    case Distribution::Sparse: {
      if (!(spec.nonzero_fraction > 0.0 && spec.nonzero_fraction <= 1.0))
        throw invalid_input("nonzero_fraction must lie in (0,1]");
      Rng mask(derive_seed(spec.seed, 0x5ba7));
      for (double& v : t.values)
        v = mask.uniform() < spec.nonzero_fraction ? values.normal() : 0.0;
      break;
    }
  }
  return t;
}

inline Distribution parse_distribution(const std::string& name) {
  if (name == "uniform") return Distribution::Uniform;
  if (name == "standard_normal" || name == "normal")
    return Distribution::StandardNormal;
  if (name == "laplace") return Distribution::Laplace;
  if (name == "sparse") return Distribution::Sparse;
  throw invalid_input("unknown distribution: " + name);
}

}  // namespace chunklab
