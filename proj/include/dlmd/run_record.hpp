#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dlmd {

enum class RunStatus { Ok, Failure };

inline const char* to_string(RunStatus s) { return s == RunStatus::Ok ? "ok" : "failure"; }

/// Metrics recorded after iteration k, i.e. on x_i(k+1) and z_i(k+1).
struct IterationMetrics {
  std::size_t k = 0;
  double gap_avg = 0.0;            // (1/n) sum_i f(x_i) - f*
  double gap_node_max = 0.0;       // max_i f(x_i) - f*
  double avg_iterate_gap = 0.0;    // max_i f(running average of x_i) - f*
  double consensus_err_max = 0.0;  // max_i |mean z - z_i|_2
  double power_avg = 0.0;          // mean over nodes of per-node average power
  double power_max = 0.0;          // max over nodes of per-node average power
  double alpha = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double max_omega_inf = 0.0;      // largest quantizer input sup-norm this iteration
  std::vector<double> node_gaps;
};

/// One seeded execution of the engine.
struct RunRecord {
  std::vector<IterationMetrics> iterations;
  RunStatus status = RunStatus::Ok;
  std::size_t k_reached = 0;  // last iteration completed without failure
  std::size_t failed_at = 0;  // iteration of the saturation event, 0 if none
  std::optional<std::pair<std::size_t, std::size_t>> failing_link;  // (receiver, sender)
  std::size_t restarts = 0;
  double lipschitz_hat = 0.0;  // max |exact subgradient| over visited iterates
  double omega2_hat = 0.0;     // max |oracle output|^2 over visited iterates
  double max_omega_inf = 0.0;  // max over the whole run
  std::uint64_t seed = 0;

  bool succeeded() const { return status == RunStatus::Ok && restarts == 0; }
  const IterationMetrics* last() const {
    return iterations.empty() ? nullptr : &iterations.back();
  }
};

}  // namespace dlmd
