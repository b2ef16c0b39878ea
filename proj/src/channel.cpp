#include "dlmd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dlmd {

NoiseFamily parse_noise_family(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::Gaussian;
  if (name == "uniform") return NoiseFamily::Uniform;
  if (name == "laplace") return NoiseFamily::Laplace;
  throw std::invalid_argument("unknown noise_family '" + name + "'");
}

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::Gaussian: return "gaussian";
    case NoiseFamily::Uniform: return "uniform";
    case NoiseFamily::Laplace: return "laplace";
  }
  return "gaussian";
}

void ChannelSpec::validate() const {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("channel: sigma2 must be finite and nonnegative");
}

double draw_noise(const ChannelSpec& spec, RandomStream& rng) {
  const double sd = std::sqrt(spec.sigma2);
  switch (spec.family) {
    case NoiseFamily::Gaussian:
      return sd * rng.normal();
    case NoiseFamily::Uniform:
      // U(-a, a) has variance a^2 / 3.
      return sd * std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    case NoiseFamily::Laplace: {
      // Laplace(b) has variance 2 b^2.
      const double b = sd / std::sqrt(2.0);
      const double u = rng.uniform() - 0.5;
      const double mag = -b * std::log1p(-2.0 * std::abs(u));
      return u < 0.0 ? -mag : mag;
    }
  }
  return 0.0;
}

Vector transmit(const ChannelSpec& spec, const Vector& s, RandomStream& rng) {
  if (spec.sigma2 == 0.0) return s;
  Vector r = s;
  for (Eigen::Index c = 0; c < r.size(); ++c) r(c) += draw_noise(spec, rng);
  return r;
}

double PowerLedger::average(std::size_t node) const {
  if (iterations_ == 0) return 0.0;
  return totals_.at(node) / static_cast<double>(iterations_);
}

double PowerLedger::max_average() const {
  double m = 0.0;
  for (std::size_t i = 0; i < totals_.size(); ++i) m = std::max(m, average(i));
  return m;
}

double PowerLedger::mean_average() const {
  if (totals_.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < totals_.size(); ++i) s += average(i);
  return s / static_cast<double>(totals_.size());
}

}  // namespace dlmd
