#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dlmd/engine.hpp"
#include "dlmd/problem.hpp"
#include "dlmd/run_record.hpp"
#include "dlmd/schedules.hpp"

namespace dlmd {

// ---------------------------------------------------------------- reference

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  double tolerance = 1e-7;
  double certificate = 0.0;  // duality gap in objective units
  std::size_t epochs = 0;
  bool converged = false;
};

/// Centralized minimizer of the hinge-plus-ridge objective by cyclic dual
/// coordinate ascent. Stops once the duality gap is below `tol`; `converged`
/// is false if max_epochs ran out first.
ReferenceSolution solve_reference(const SvmDataset& data, double tol = 1e-7,
                                  std::size_t max_epochs = 1000000);

/// Constants the step-size formula needs but cannot know in advance.
struct PilotEstimates {
  double Omega2 = 0.0;  // max |g_i|^2 on the segment from 0 to x*
  double R_prox = 0.0;  // sqrt(psi(x*)) for the quadratic prox
  double L_hat = 0.0;   // sqrt(Omega2)
};

PilotEstimates pilot_estimates(const GlobalObjective& objective, const ReferenceSolution& ref);

// ------------------------------------------------------------------- bounds

/// 20 R log(K sqrt(n)) / (K^((1-gamma)/2) sqrt(1-lambda)) * xi.
/// Throws std::invalid_argument if lambda >= 1 or K == 0.
double theorem1_bound(const ScheduleSet& s, std::size_t n, std::size_t K, double lambda);

/// (1 - (c0^2 Delta^2 / 2 + c0^2 sigma2 / (2 gamma c1) + Omega2) / (U - L_hat)^2)^(2 K d E).
/// Zero when U <= L_hat or the base is negative.
double theorem2_bound(double c0, double c1, double gamma, double Delta, double sigma2,
                      double Omega2, double U, double L_hat, std::size_t K, std::size_t d,
                      std::size_t num_edges);

/// Upper bound on per-node average transmit power when no quantizer saturates.
double power_bound(std::size_t n, std::size_t d, double c1, double U, double tau, std::size_t K);

// --------------------------------------------------------------- statistics

/// Wilson score interval at 95% confidence.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

/// Calls fn(i) for i in [0, count) on up to `threads` workers. threads == 0
/// uses the hardware concurrency.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Seed for replication `index` under `master`.
std::uint64_t replication_seed(std::uint64_t master, std::size_t index);

struct SuccessEstimate {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double p_hat = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double bound = 0.0;
};

/// Runs `trials` independent replications without warm restarts. A trial
/// succeeds when it reaches the horizon with no saturation. If `records` is
/// given it receives every RunRecord in trial order.
SuccessEstimate estimate_success_probability(const EngineConfig& config,
                                             const GlobalObjective& objective,
                                             std::size_t trials, std::uint64_t seed,
                                             double bound = 0.0, unsigned threads = 0,
                                             double f_star = 0.0,
                                             std::vector<RunRecord>* records = nullptr);

// ---------------------------------------------------------- noise pipeline

struct NoiseAccumulationPoint {
  std::size_t k = 0;
  double var_discrepancy = 0.0;  // empirical Var(estimate - proxy)
  double var_scaled = 0.0;       // empirical Var(beta(k) (estimate - proxy))
  double predicted = 0.0;        // sigma2 * sum_{l<=k} alpha(l)^-2
  double beta = 0.0;
};

/// Drives `links` isolated differential links of dimension `d` for
/// max(checkpoints) rounds. Each sender state performs a small bounded random
/// walk so the quantizer is exercised. Variances pool all links and coordinates.
std::vector<NoiseAccumulationPoint> noise_accumulation_study(
    const std::function<double(std::size_t)>& alpha_fn,
    const std::function<double(std::size_t)>& beta_fn, const ChannelSpec& channel,
    const QuantizerSpec& quantizer, const std::vector<std::size_t>& checkpoints,
    std::size_t links, std::size_t d, std::uint64_t seed);

// -------------------------------------------------------------- experiments

/// Labels attached to each run for CSV output.
struct RunLabel {
  std::string experiment_id;
  std::string variant;
  std::string topology;
  double gamma = 0.0;
  double tau = 0.0;
  double c0 = 1.0;
  double c1 = 1.0;
  double sigma2 = 0.0;
  unsigned rate_bits = 0;
  double U = 0.0;
  std::uint64_t seed = 0;
};

struct LabeledRun {
  RunLabel label;
  RunRecord record;
};

/// One curve of a convergence experiment.
struct SeriesSpec {
  std::string name;  // e.g. "noiseless", "naive", "diffex_g0.1"
  Variant variant = Variant::DiffEx;
  double gamma = 0.5;
};

struct ConvergenceSettings {
  std::string experiment_id = "convergence";
  SvmDataOptions data;
  std::vector<std::string> topologies{"complete", "ring2"};
  std::vector<SeriesSpec> series;
  unsigned rate_bits = 6;
  double U = 100.0;
  double sigma2 = 0.1;
  NoiseFamily noise_family = NoiseFamily::Gaussian;
  double c0 = 1.0;
  double c1 = 1.0;
  double R_prox = 0.0;  // <= 0: pilot estimate
  double Omega2 = 0.0;  // <= 0: pilot estimate
  std::size_t horizon = 1000;
  std::size_t replications = 5;
  std::size_t batch_size = 0;
  ProxKind prox = ProxKind::Quadratic;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct SeriesResult {
  SeriesSpec spec;
  std::string topology;
  double lambda = 0.0;
  std::vector<LabeledRun> runs;
  /// Mean over replications of gap_avg at each k (only k reached by all runs).
  std::vector<double> mean_gap_avg;
  std::vector<double> mean_avg_iterate_gap;
  double theorem1 = 0.0;  // diffex series only
  ScheduleSet schedules;  // diffex series only
};

struct ConvergenceResult {
  ReferenceSolution reference;
  PilotEstimates pilot;
  double R_prox = 0.0;
  double Omega2 = 0.0;
  std::vector<SeriesResult> series;
};

/// Default series for the convergence figure.
std::vector<SeriesSpec> default_convergence_series();

/// Step size shared by both baselines: R_prox / (4 xi0 sqrt(k)) with
/// xi0^2 = Omega2 + Delta^2 d / 4. It does not depend on the topology.
BaselineSchedule baseline_schedule(double R_prox, double Omega2, double Delta, std::size_t d);

ConvergenceResult run_convergence(const ConvergenceSettings& settings);

struct SweepSettings {
  std::string experiment_id = "saturation_sweep";
  SvmDataOptions data;
  std::vector<std::string> topologies{"ring2", "complete"};
  std::vector<double> U_values{0.8, 1.0, 1.2, 1.4, 1.6, 1.8};
  unsigned rate_bits = 3;
  double sigma2 = 0.05;
  NoiseFamily noise_family = NoiseFamily::Gaussian;
  double gamma = 0.5;
  double c0 = 1.0;
  double c1 = 1.0;
  double R_prox = 0.0;
  double Omega2 = 0.0;
  std::size_t horizon = 75;
  std::size_t trials = 100;
  std::size_t batch_size = 0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool keep_records = true;
};

struct SweepPoint {
  std::string topology;
  double U = 0.0;
  double lambda = 0.0;
  std::size_t num_edges = 0;
  SuccessEstimate estimate;
  std::vector<LabeledRun> runs;
};

struct SweepResult {
  ReferenceSolution reference;
  PilotEstimates pilot;
  double R_prox = 0.0;
  double Omega2 = 0.0;
  double L_hat = 0.0;
  std::vector<SweepPoint> points;
};

SweepResult run_saturation_sweep(const SweepSettings& settings);

// ---------------------------------------------------------------------- CSV

extern const char* const kRunCsvHeader;

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

/// One row per (run, k); a failed run adds a final row with status "failure".
/// Throws std::runtime_error naming the path on I/O errors.
void emit_csv(const std::vector<LabeledRun>& runs, const std::string& path);
void emit_success_csv(const std::string& experiment_id, const std::vector<SweepPoint>& points,
                      const std::string& path);
/// k, then one mean-gap column per series.
void emit_mean_curves(const std::vector<SeriesResult>& series, const std::string& path);

}  // namespace dlmd
