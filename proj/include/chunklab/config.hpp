#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "chunklab/chunk.hpp"
#include "chunklab/common.hpp"
#include "chunklab/entropy.hpp"
#include "chunklab/fusion.hpp"

namespace chunklab {

// Tool-wide defaults, overridable by a JSON config document and then by
// command-line flags. Validation happens at load so a bad parameter fails
// before any command executes.
struct Config {
  int bins = 256;
  double epsilon = 1e-8;
  std::size_t stride = 1;
  ChunkBounds bounds{32, 512};
  std::string calibration = "logk";  // "logk" | "legacy" | numeric string
  double legacy_h_ref = 8.0;
  FusionWeights weights{};           // alpha/beta/gamma/tau
  double ema_decay = 0.85;
  std::vector<int> bucket_set{128, 256, 512, 1024, 2048};
  std::uint64_t seed = 0;
};

inline CalibrationRef resolve_calibration(const Config& cfg) {
  if (cfg.calibration == "logk") return CalibrationRef::log_k(cfg.bins);
  if (cfg.calibration == "legacy") return CalibrationRef::legacy(cfg.legacy_h_ref);
  try {
    return CalibrationRef::legacy(std::stod(cfg.calibration));
  } catch (const std::exception&) {
    throw invalid_input("calibration must be logk, legacy, or a positive number");
  }
}

inline void validate_config(const Config& cfg) {
  if (cfg.bins < 2) throw invalid_input("degenerate spec");
  if (!(cfg.epsilon > 0.0)) throw invalid_input("epsilon must be positive");
  if (cfg.stride < 1) throw invalid_input("stride must be >= 1");
  validate_bounds(cfg.bounds);
  resolve_calibration(cfg);
  if (!(cfg.ema_decay >= 0.0 && cfg.ema_decay < 1.0))
    throw invalid_input("ema decay must lie in [0,1)");
  validate_bucket_set(cfg.bucket_set);
  const double w[] = {cfg.weights.alpha, cfg.weights.beta, cfg.weights.gamma};
  for (double v : w)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw invalid_input("fusion weights must be finite and non-negative");
  if (!std::isfinite(cfg.weights.tau))
    throw invalid_input("tau must be finite");
}

inline Config config_from_json(const nlohmann::json& j) {
  Config cfg;
  cfg.bins = j.value("bins", cfg.bins);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.stride = j.value("stride", cfg.stride);
  if (j.contains("bounds")) {
    cfg.bounds.c_min = j.at("bounds").at(0).get<int>();
    cfg.bounds.c_max = j.at("bounds").at(1).get<int>();
  }
  cfg.calibration = j.value("calibration", cfg.calibration);
  cfg.legacy_h_ref = j.value("legacy_h_ref", cfg.legacy_h_ref);
  cfg.weights.alpha = j.value("alpha", cfg.weights.alpha);
  cfg.weights.beta = j.value("beta", cfg.weights.beta);
  cfg.weights.gamma = j.value("gamma", cfg.weights.gamma);
  cfg.weights.tau = j.value("tau", cfg.weights.tau);
  cfg.ema_decay = j.value("ema_decay", cfg.ema_decay);
  if (j.contains("bucket_set"))
    cfg.bucket_set = j.at("bucket_set").get<std::vector<int>>();
  cfg.seed = j.value("seed", cfg.seed);
  validate_config(cfg);
  return cfg;
}

}  // namespace chunklab
