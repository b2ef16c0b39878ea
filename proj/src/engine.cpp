#include "dlmd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dlmd {

Variant parse_variant(const std::string& name) {
  if (name == "diffex") return Variant::DiffEx;
  if (name == "naive_dlmd" || name == "naive") return Variant::NaiveDlmd;
  if (name == "noiseless_baseline" || name == "noiseless") return Variant::NoiselessBaseline;
  throw std::invalid_argument("unknown variant '" + name + "'");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::DiffEx: return "diffex";
    case Variant::NaiveDlmd: return "naive_dlmd";
    case Variant::NoiselessBaseline: return "noiseless_baseline";
  }
  return "diffex";
}

void EngineConfig::validate(std::size_t dim) const {
  if (horizon == 0) throw std::invalid_argument("engine: horizon must be positive");
  if (dim == 0) throw std::invalid_argument("engine: dimension must be positive");
  quantizer.validate();
  channel.validate();
  if (prox.kind() == ProxKind::AnchoredQuadratic && prox.anchor().size() != 0 &&
      static_cast<std::size_t>(prox.anchor().size()) != dim)
    throw std::invalid_argument("engine: proximal anchor dimension mismatch");
  if (exchange == Exchange::Direct && variant == Variant::DiffEx)
    throw std::invalid_argument("engine: direct exchange is only defined for naive_dlmd");
  if (const auto* s = std::get_if<ScheduleSet>(&schedule)) {
    if (!(s->xi > 0.0)) throw std::invalid_argument("engine: schedule has xi == 0");
  }
}

Simulation::Simulation(EngineConfig config, const GlobalObjective& objective)
    : config_(std::move(config)), objective_(&objective) {
  const std::size_t n = config_.topology.size();
  const std::size_t d = objective.dim();
  if (objective.num_nodes() != n)
    throw std::invalid_argument("engine: objective has a different node count than the topology");
  config_.validate(d);
  if (config_.variant == Variant::NoiselessBaseline) {
    config_.channel.sigma2 = 0.0;
    config_.quantizer = QuantizerSpec::infinite_rate();
  }

  const auto dim = static_cast<Eigen::Index>(d);
  z_.assign(n, Vector::Zero(dim));
  x_sum_.assign(n, Vector::Zero(dim));
  x_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) x_.push_back(config_.prox.project(z_[i], eta(config_.schedule, 1)));
  ledger_ = PowerLedger(n);

  link_offset_.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    link_offset_.push_back(links_.size());
    for (std::size_t j : config_.topology.neighbors(i)) {
      links_.push_back(Link{i, j, config_.topology.weight(i, j), Vector::Zero(dim),
                            Vector::Zero(dim), Vector::Zero(dim),
                            RandomStream(config_.seed, StreamTag::kQuantizer, {i, j}),
                            RandomStream(config_.seed, StreamTag::kChannel, {i, j})});
    }
  }
  link_offset_.push_back(links_.size());
  for (std::size_t i = 0; i < n; ++i)
    oracle_rng_.emplace_back(config_.seed, StreamTag::kOracle, std::initializer_list<std::uint64_t>{i});
}

double Simulation::link_alpha(std::size_t k) const {
  return config_.variant == Variant::DiffEx ? alpha(config_.schedule, k) : 1.0;
}

double Simulation::link_beta(std::size_t k) const {
  return config_.variant == Variant::DiffEx ? beta(config_.schedule, k) : 1.0;
}

std::size_t Simulation::link_index(std::size_t receiver, std::size_t sender) const {
  for (std::size_t l = link_offset_.at(receiver); l < link_offset_.at(receiver + 1); ++l)
    if (links_[l].sender == sender) return l;
  throw std::out_of_range("engine: no link between the given nodes");
}

std::pair<std::size_t, std::size_t> Simulation::link_endpoints(std::size_t l) const {
  return {links_.at(l).receiver, links_.at(l).sender};
}

Vector Simulation::primal_average(std::size_t i) const {
  const std::size_t done = k_ - 1;
  if (done == 0) return x_.at(i);
  return x_sum_.at(i) / static_cast<double>(done);
}

Vector Simulation::dual_mean() const {
  Vector s = Vector::Zero(z_.front().size());
  for (const auto& z : z_) s += z;
  return s / static_cast<double>(z_.size());
}

StepOutcome Simulation::step() {
  const std::size_t k = k_;
  const double a = link_alpha(k);
  const double b = link_beta(k);
  const bool direct = config_.variant != Variant::DiffEx && config_.exchange == Exchange::Direct;
  StepOutcome out;
  out.k = k;

  // Saturation is checked on every link before any state changes.
  last_max_omega_ = 0.0;
  std::vector<Vector> omega(links_.size());
  for (std::size_t l = 0; l < links_.size(); ++l) {
    const Link& link = links_[l];
    omega[l] = direct ? z_[link.sender] : Vector(z_[link.sender] - link.proxy);
    const double sup = omega[l].size() ? omega[l].cwiseAbs().maxCoeff() : 0.0;
    last_max_omega_ = std::max(last_max_omega_, sup);
    if (!config_.quantizer.bypass() && sup > config_.quantizer.range && !out.failing_link) {
      out.status = RunStatus::Failure;
      out.failing_link = std::make_pair(link.receiver, link.sender);
    }
  }
  if (out.status == RunStatus::Failure) return out;

  for (std::size_t l = 0; l < links_.size(); ++l) {
    Link& link = links_[l];
    QuantizeOutcome q = quantize(config_.quantizer, omega[l], link.quantizer_rng);
    const Vector s = a * q.value;
    ledger_.record(link.sender, s);
    const Vector received = transmit(config_.channel, s, link.channel_rng);
    const Vector decoded = received / a;
    if (direct) {
      link.proxy = q.value;
      link.estimate = decoded;
      if (config_.track_noise) link.noise_sum = decoded - q.value;
    } else {
      link.proxy += q.value;
      link.estimate += decoded;
      if (config_.track_noise) link.noise_sum += (received - s) / a;
    }
  }
  ledger_.end_iteration();

  const std::size_t n = z_.size();
  const double step_eta = eta(config_.schedule, k);
  std::vector<Vector> z_next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w_self = (1.0 - b) + b * config_.topology.weight(i, i);
    Vector zi = w_self * z_[i];
    for (std::size_t l = link_offset_[i]; l < link_offset_[i + 1]; ++l)
      zi.noalias() += (b * links_[l].weight) * links_[l].estimate;

    const LocalObjective& f = objective_->local(i);
    Vector g;
    if (config_.batch_size == 0) {
      g = f.subgradient(x_[i]);
      lipschitz_hat_ = std::max(lipschitz_hat_, g.norm());
    } else {
      g = f.stochastic_subgradient(x_[i], config_.batch_size, oracle_rng_[i]);
      lipschitz_hat_ = std::max(lipschitz_hat_, f.subgradient(x_[i]).norm());
    }
    omega2_hat_ = std::max(omega2_hat_, g.squaredNorm());
    z_next[i] = zi + g;
  }
  for (std::size_t i = 0; i < n; ++i) {
    x_sum_[i] += x_[i];
    z_[i] = std::move(z_next[i]);
    x_[i] = config_.prox.project(z_[i], step_eta);
  }
  ++k_;
  return out;
}

void Simulation::warm_restart() {
  const Vector zbar = dual_mean();
  const double step_eta = eta(config_.schedule, std::max<std::size_t>(k_ - 1, 1));
  for (std::size_t i = 0; i < z_.size(); ++i) {
    z_[i] = zbar;
    x_[i] = config_.prox.project(zbar, step_eta);
  }
  for (Link& link : links_) {
    link.proxy = zbar;
    link.estimate = zbar;
    link.noise_sum.setZero();
  }
  ++restarts_;
}

RunRecord run(const EngineConfig& config, const GlobalObjective& objective, double f_star) {
  Simulation sim(config, objective);
  RunRecord rec;
  rec.seed = config.seed;
  const std::size_t n = sim.num_nodes();
  rec.iterations.reserve(config.horizon);

  while (sim.iteration() <= config.horizon) {
    const std::size_t k = sim.iteration();
    StepOutcome out = sim.step();
    rec.max_omega_inf = std::max(rec.max_omega_inf, sim.last_max_omega());
    if (out.status == RunStatus::Failure) {
      if (config.warm_restart && sim.restarts() < config.max_restarts) {
        sim.warm_restart();
        continue;
      }
      rec.status = RunStatus::Failure;
      rec.failed_at = k;
      rec.failing_link = out.failing_link;
      break;
    }
    rec.k_reached = k;

    IterationMetrics m;
    m.k = k;
    m.alpha = alpha(sim.config().schedule, k);
    m.beta = beta(sim.config().schedule, k);
    if (config.variant != Variant::DiffEx) m.alpha = m.beta = 1.0;
    m.eta = eta(sim.config().schedule, k);
    m.max_omega_inf = sim.last_max_omega();
    const Vector zbar = sim.dual_mean();
    m.node_gaps.resize(n);
    double gap_sum = 0.0;
    m.gap_node_max = -std::numeric_limits<double>::infinity();
    m.avg_iterate_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = objective.value(sim.primal(i)) - f_star;
      m.node_gaps[i] = gi;
      gap_sum += gi;
      m.gap_node_max = std::max(m.gap_node_max, gi);
      m.avg_iterate_gap =
          std::max(m.avg_iterate_gap, objective.value(sim.primal_average(i)) - f_star);
      m.consensus_err_max = std::max(m.consensus_err_max, (zbar - sim.dual(i)).norm());
    }
    m.gap_avg = gap_sum / static_cast<double>(n);
    m.power_avg = sim.ledger().mean_average();
    m.power_max = sim.ledger().max_average();
    rec.iterations.push_back(std::move(m));
  }
  rec.restarts = sim.restarts();
  rec.lipschitz_hat = sim.lipschitz_hat();
  rec.omega2_hat = sim.omega2_hat();
  return rec;
}

}  // namespace dlmd
