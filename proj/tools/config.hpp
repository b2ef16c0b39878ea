#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dlmd/harness.hpp"

namespace dlmd::tools {

struct NoiseStudySettings {
  std::string experiment_id = "noise_accumulation";
  double sigma2 = 0.1;
  NoiseFamily noise_family = NoiseFamily::Gaussian;
  unsigned rate_bits = 6;
  double U = 10.0;
  double gamma = 0.5;
  double c0 = 1.0;
  double c1 = 1.0;
  std::vector<std::size_t> checkpoints{100, 400, 1600};
  std::size_t links = 2000;
  std::size_t d = 5;
  std::uint64_t seed = 1;
};

struct SimConfig {
  ConvergenceSettings convergence;
  SweepSettings sweep;
  NoiseStudySettings noise;
  std::optional<Variant> variant;  // restricts convergence series
  std::string source;              // config file text, empty if none
};

/// Defaults for every experiment, overridden by the keys present in `path`.
/// Unknown keys are rejected with the key name in the message.
SimConfig load_config(const std::string& path);
SimConfig default_config();

/// Series for the convergence experiment given a list of diffex gammas.
std::vector<SeriesSpec> series_for(const std::vector<double>& gammas, bool baselines);

}  // namespace dlmd::tools
