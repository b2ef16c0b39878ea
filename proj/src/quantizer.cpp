#include "dlmd/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dlmd {

void QuantizerSpec::validate() const {
  if (bypass()) return;
  if (rate_bits > 52) throw std::invalid_argument("quantizer: rate_bits must be <= 52");
  if (!(range > 0.0) || !std::isfinite(range))
    throw std::invalid_argument("quantizer: dynamic range must be positive and finite");
}

double QuantizerSpec::resolution() const {
  if (bypass()) return 0.0;
  return 2.0 * range / static_cast<double>(levels() - 1);
}

double QuantizerSpec::level(std::size_t j) const {
  // Written so the grid is exactly antisymmetric and hits +-range.
  const double top = static_cast<double>(levels() - 1);
  return range * ((2.0 * static_cast<double>(j) - top) / top);
}

std::vector<double> QuantizerSpec::grid() const {
  std::vector<double> g;
  if (bypass()) return g;
  g.reserve(levels());
  for (std::size_t j = 0; j < levels(); ++j) g.push_back(level(j));
  return g;
}

double quantize_scalar(const QuantizerSpec& spec, double v, RandomStream& rng) {
  if (spec.bypass()) return v;
  const std::size_t top = spec.levels() - 1;
  if (v >= spec.range) return spec.level(top);
  const double delta = spec.resolution();
  auto j = static_cast<std::size_t>(std::floor((v + spec.range) / delta));
  j = std::min(j, top - 1);
  // Floating error in the division can put v just outside [u_j, u_{j+1}).
  while (j > 0 && v < spec.level(j)) --j;
  while (j + 1 < top && v >= spec.level(j + 1)) ++j;
  const double lower = spec.level(j);
  const double upper = spec.level(j + 1);
  if (v == lower) return lower;
  const double p_lower = (upper - v) / delta;
  return rng.uniform() < p_lower ? lower : upper;
}

QuantizeOutcome quantize(const QuantizerSpec& spec, const Vector& v, RandomStream& rng) {
  QuantizeOutcome out;
  if (spec.bypass()) {
    out.value = v;
    return out;
  }
  if (v.size() > 0 && v.cwiseAbs().maxCoeff() > spec.range) {
    out.saturated = true;
    return out;
  }
  out.value.resize(v.size());
  for (Eigen::Index s = 0; s < v.size(); ++s) out.value(s) = quantize_scalar(spec, v(s), rng);
  return out;
}

}  // namespace dlmd
