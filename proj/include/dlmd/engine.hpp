#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dlmd/channel.hpp"
#include "dlmd/problem.hpp"
#include "dlmd/quantizer.hpp"
#include "dlmd/random.hpp"
#include "dlmd/run_record.hpp"
#include "dlmd/schedules.hpp"
#include "dlmd/topology.hpp"

namespace dlmd {

/// diffex: differential exchange with the configured alpha/beta/eta.
/// naive_dlmd: same links but alpha = beta = 1; only eta is taken from the schedule.
/// noiseless_baseline: naive_dlmd with a noise-free, infinite-rate channel.
enum class Variant { DiffEx, NaiveDlmd, NoiselessBaseline };

/// How naive_dlmd sends states. Differential keeps the proxy/estimate
/// recursion. Direct sends the quantized state itself every round.
enum class Exchange { Differential, Direct };

Variant parse_variant(const std::string& name);
std::string to_string(Variant v);

struct EngineConfig {
  Topology topology = make_fully_connected(2);
  Schedule schedule = BaselineSchedule{};
  QuantizerSpec quantizer;
  ChannelSpec channel;
  ProximalMap prox;
  std::size_t batch_size = 0;  // 0 = exact subgradient
  std::size_t horizon = 100;
  std::uint64_t seed = 0;
  Variant variant = Variant::DiffEx;
  Exchange exchange = Exchange::Differential;
  /// On saturation, restart from the network-average state instead of failing.
  bool warm_restart = false;
  std::size_t max_restarts = 100;
  /// Keep the per-link sum of decoded noise for diagnostics.
  bool track_noise = false;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate(std::size_t dim) const;
};

struct StepOutcome {
  RunStatus status = RunStatus::Ok;
  std::optional<std::pair<std::size_t, std::size_t>> failing_link;  // (receiver, sender)
  std::size_t k = 0;
};

/// Synchronous network state. Directed link (i <- j) carries node j's state to
/// node i; the sender keeps the proxy y_ij and the receiver the estimate.
class Simulation {
 public:
  Simulation(EngineConfig config, const GlobalObjective& objective);

  /// Runs iteration k = iteration() and advances the counter on success.
  StepOutcome step();
  /// Resets every node and link to the network-average dual state and
  /// continues the schedule from the current iteration.
  void warm_restart();

  std::size_t iteration() const { return k_; }
  std::size_t num_nodes() const { return z_.size(); }
  const EngineConfig& config() const { return config_; }

  const Vector& dual(std::size_t i) const { return z_.at(i); }
  const Vector& primal(std::size_t i) const { return x_.at(i); }
  /// Average of x_i(1), ..., x_i(k) over completed iterations.
  Vector primal_average(std::size_t i) const;
  Vector dual_mean() const;

  std::size_t num_links() const { return links_.size(); }
  /// Link index for receiver i and sender j. Throws if (i, j) is not an edge.
  std::size_t link_index(std::size_t receiver, std::size_t sender) const;
  std::pair<std::size_t, std::size_t> link_endpoints(std::size_t l) const;
  const Vector& proxy(std::size_t l) const { return links_.at(l).proxy; }
  const Vector& estimate(std::size_t l) const { return links_.at(l).estimate; }
  /// Sum over completed iterations of decoded noise n / alpha. Zero unless track_noise.
  const Vector& noise_sum(std::size_t l) const { return links_.at(l).noise_sum; }

  const PowerLedger& ledger() const { return ledger_; }
  double last_max_omega() const { return last_max_omega_; }
  double lipschitz_hat() const { return lipschitz_hat_; }
  double omega2_hat() const { return omega2_hat_; }
  std::size_t restarts() const { return restarts_; }

 private:
  struct Link {
    std::size_t receiver;
    std::size_t sender;
    double weight;  // P(receiver, sender)
    Vector proxy;
    Vector estimate;
    Vector noise_sum;
    RandomStream quantizer_rng;
    RandomStream channel_rng;
  };

  double link_alpha(std::size_t k) const;
  double link_beta(std::size_t k) const;

  EngineConfig config_;
  const GlobalObjective* objective_;
  std::vector<Vector> z_;
  std::vector<Vector> x_;
  std::vector<Vector> x_sum_;
  std::vector<Link> links_;
  std::vector<std::size_t> link_offset_;
  std::vector<RandomStream> oracle_rng_;
  PowerLedger ledger_;
  std::size_t k_ = 1;
  std::size_t restarts_ = 0;
  double last_max_omega_ = 0.0;
  double lipschitz_hat_ = 0.0;
  double omega2_hat_ = 0.0;
};

/// Executes up to config.horizon iterations, stopping at the first failure
/// (or restarting when warm_restart is set). Gaps are measured against f_star.
RunRecord run(const EngineConfig& config, const GlobalObjective& objective, double f_star);

}  // namespace dlmd
