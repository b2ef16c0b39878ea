#pragma once

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

namespace dlmd {

/// Confidence, power-control and step-size sequences tied together by
/// tau + 2 gamma = 1.
///
///   alpha(k) = sqrt(c1) k^(tau/2)
///   beta(k)  = c0 k^(-gamma)
///   eta(k)   = R_prox sqrt(1 - lambda) / (4 xi k^((1 + gamma)/2))
///
/// with xi^2 = Omega2 + c0^2 Delta^2 d / 4 + c0^2 sigma2 d / (2 gamma c1).
/// Fields are plain data; use make_schedules to get a validated set.
struct ScheduleSet {
  double gamma = 0.5;
  double tau = 0.0;
  double c0 = 1.0;
  double c1 = 1.0;
  double R_prox = 1.0;
  double Omega2 = 1.0;
  double Delta = 0.0;
  double sigma2 = 0.0;
  std::size_t d = 1;
  double lambda = 0.0;
  double xi = 1.0;

  double alpha(std::size_t k) const;
  double beta(std::size_t k) const;
  double eta(std::size_t k) const;
};

/// Throws std::invalid_argument for gamma outside (0, 0.5], c0 < 1, c1 <= 0,
/// negative variances, R_prox <= 0, lambda outside [0, 1), or xi == 0.
ScheduleSet make_schedules(double gamma, double c0, double c1, double R_prox, double Omega2,
                           double Delta, double sigma2, std::size_t d, double lambda);

/// Effective standard deviation xi for the given constants.
double effective_xi(double gamma, double c0, double c1, double Omega2, double Delta,
                    double sigma2, std::size_t d);

/// Schedule for the uncompensated baselines: alpha = beta = 1 and
/// eta(k) = eta0 / sqrt(k).
struct BaselineSchedule {
  double eta0 = 1.0;

  double alpha(std::size_t k) const;
  double beta(std::size_t k) const;
  double eta(std::size_t k) const;
};

using Schedule = std::variant<ScheduleSet, BaselineSchedule>;

double alpha(const Schedule& s, std::size_t k);
double beta(const Schedule& s, std::size_t k);
double eta(const Schedule& s, std::size_t k);

/// beta(k)^2 * sum_{l<=k} alpha(l)^-2 for k = 1..K. Index 0 holds k = 1.
std::vector<double> check_noise_condition(const std::function<double(std::size_t)>& alpha_fn,
                                          const std::function<double(std::size_t)>& beta_fn,
                                          std::size_t K);

}  // namespace dlmd
