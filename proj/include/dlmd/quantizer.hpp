#pragma once

#include <cstddef>
#include <vector>

#include "dlmd/random.hpp"
#include "dlmd/topology.hpp"

namespace dlmd {

/// Uniform finite-range grid with 2^rate_bits levels spanning [-range, +range].
/// rate_bits == 0 selects the infinite-rate bypass: values pass through
/// unchanged and nothing saturates.
struct QuantizerSpec {
  unsigned rate_bits = 6;
  double range = 100.0;

  static QuantizerSpec infinite_rate() { return {0, 0.0}; }

  bool bypass() const { return rate_bits == 0; }
  std::size_t levels() const { return std::size_t{1} << rate_bits; }
  /// Grid spacing 2U / (2^R - 1). Zero in bypass mode.
  double resolution() const;
  /// Level index j in [0, levels) mapped to its value. Endpoints are exactly +-range.
  double level(std::size_t j) const;
  std::vector<double> grid() const;

  /// Throws std::invalid_argument on a nonpositive range or rate_bits > 52.
  void validate() const;
};

inline double resolution(const QuantizerSpec& spec) { return spec.resolution(); }

struct QuantizeOutcome {
  Vector value;
  bool saturated = false;
};

/// Rounds one in-range scalar to a neighbouring grid level. The lower level is
/// chosen with probability (upper - v) / resolution. v == +range maps to the
/// top level without consuming randomness.
double quantize_scalar(const QuantizerSpec& spec, double v, RandomStream& rng);

/// Coordinatewise stochastic rounding. If any |v_s| > range the outcome is
/// flagged as saturated and `value` is left empty; no randomness is consumed.
QuantizeOutcome quantize(const QuantizerSpec& spec, const Vector& v, RandomStream& rng);

}  // namespace dlmd
