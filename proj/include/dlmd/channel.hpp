#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dlmd/random.hpp"
#include "dlmd/topology.hpp"

namespace dlmd {

enum class NoiseFamily { Gaussian, Uniform, Laplace };

NoiseFamily parse_noise_family(const std::string& name);
std::string to_string(NoiseFamily f);

/// Additive zero-mean noise with per-coordinate variance sigma2.
struct ChannelSpec {
  double sigma2 = 0.0;
  NoiseFamily family = NoiseFamily::Gaussian;

  void validate() const;
};

/// One zero-mean draw with variance spec.sigma2.
double draw_noise(const ChannelSpec& spec, RandomStream& rng);

/// Returns s + n. With sigma2 == 0 the input is returned unchanged and the
/// stream is not advanced.
Vector transmit(const ChannelSpec& spec, const Vector& s, RandomStream& rng);

/// Per-node transmit energy, summed over every signal a node sends.
class PowerLedger {
 public:
  explicit PowerLedger(std::size_t nodes = 1) : totals_(nodes, 0.0) {}

  void record(std::size_t node, const Vector& s) { totals_.at(node) += s.squaredNorm(); }
  void end_iteration() { ++iterations_; }

  std::size_t iterations() const { return iterations_; }
  double total(std::size_t node) const { return totals_.at(node); }
  /// total / iterations, or 0 before the first iteration.
  double average(std::size_t node) const;
  double max_average() const;
  double mean_average() const;

 private:
  std::vector<double> totals_;
  std::size_t iterations_ = 0;
};

}  // namespace dlmd
