#include "dlmd/schedules.hpp"

#include <cmath>
#include <stdexcept>

namespace dlmd {

namespace {
void require_k(std::size_t k) {
  if (k == 0) throw std::invalid_argument("schedules are defined for k >= 1");
}
}  // namespace

double ScheduleSet::alpha(std::size_t k) const {
  require_k(k);
  return std::sqrt(c1) * std::pow(static_cast<double>(k), tau / 2.0);
}

double ScheduleSet::beta(std::size_t k) const {
  require_k(k);
  return c0 * std::pow(static_cast<double>(k), -gamma);
}

double ScheduleSet::eta(std::size_t k) const {
  require_k(k);
  return R_prox * std::sqrt(1.0 - lambda) /
         (4.0 * xi * std::pow(static_cast<double>(k), (1.0 + gamma) / 2.0));
}

double effective_xi(double gamma, double c0, double c1, double Omega2, double Delta,
                    double sigma2, std::size_t d) {
  const double dd = static_cast<double>(d);
  return std::sqrt(Omega2 + c0 * c0 * Delta * Delta * dd / 4.0 +
                   c0 * c0 * sigma2 * dd / (2.0 * gamma * c1));
}

ScheduleSet make_schedules(double gamma, double c0, double c1, double R_prox, double Omega2,
                           double Delta, double sigma2, std::size_t d, double lambda) {
  if (!(gamma > 0.0 && gamma <= 0.5))
    throw std::invalid_argument("schedules: gamma must lie in (0, 0.5]");
  if (!(c0 >= 1.0)) throw std::invalid_argument("schedules: c0 must be >= 1");
  if (!(c1 > 0.0)) throw std::invalid_argument("schedules: c1 must be positive");
  if (!(R_prox > 0.0)) throw std::invalid_argument("schedules: R_prox must be positive");
  if (!(Omega2 >= 0.0 && Delta >= 0.0 && sigma2 >= 0.0))
    throw std::invalid_argument("schedules: variance inputs must be nonnegative");
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("schedules: lambda must lie in [0, 1)");
  if (d == 0) throw std::invalid_argument("schedules: dimension must be positive");

  ScheduleSet s;
  s.gamma = gamma;
  s.tau = 1.0 - 2.0 * gamma;
  s.c0 = c0;
  s.c1 = c1;
  s.R_prox = R_prox;
  s.Omega2 = Omega2;
  s.Delta = Delta;
  s.sigma2 = sigma2;
  s.d = d;
  s.lambda = lambda;
  s.xi = effective_xi(gamma, c0, c1, Omega2, Delta, sigma2, d);
  if (!(s.xi > 0.0))
    throw std::invalid_argument(
        "schedules: xi == 0 (noiseless exact case); use a constant step size instead");
  return s;
}

double BaselineSchedule::alpha(std::size_t k) const {
  require_k(k);
  return 1.0;
}

double BaselineSchedule::beta(std::size_t k) const {
  require_k(k);
  return 1.0;
}

double BaselineSchedule::eta(std::size_t k) const {
  require_k(k);
  return eta0 / std::sqrt(static_cast<double>(k));
}

double alpha(const Schedule& s, std::size_t k) {
  return std::visit([k](const auto& v) { return v.alpha(k); }, s);
}
double beta(const Schedule& s, std::size_t k) {
  return std::visit([k](const auto& v) { return v.beta(k); }, s);
}
double eta(const Schedule& s, std::size_t k) {
  return std::visit([k](const auto& v) { return v.eta(k); }, s);
}

std::vector<double> check_noise_condition(const std::function<double(std::size_t)>& alpha_fn,
                                          const std::function<double(std::size_t)>& beta_fn,
                                          std::size_t K) {
  std::vector<double> ratio;
  ratio.reserve(K);
  double inv_sq_sum = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double a = alpha_fn(k);
    inv_sq_sum += 1.0 / (a * a);
    const double b = beta_fn(k);
    ratio.push_back(b * b * inv_sq_sum);
  }
  return ratio;
}

}  // namespace dlmd
