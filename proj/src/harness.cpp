#include "dlmd/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace dlmd {

// ---------------------------------------------------------------- reference

ReferenceSolution solve_reference(const SvmDataset& data, double tol, std::size_t max_epochs) {
  if (!(data.mu > 0.0)) throw std::invalid_argument("solve_reference: mu must be positive");
  const std::size_t N = data.total_points();
  const auto d = static_cast<Eigen::Index>(data.d);
  Matrix A(static_cast<Eigen::Index>(N), d);
  Vector b(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < data.n; ++i) {
    const auto off = static_cast<Eigen::Index>(i * data.m);
    A.middleRows(off, static_cast<Eigen::Index>(data.m)) = data.features[i];
    b.segment(off, static_cast<Eigen::Index>(data.m)) = data.labels[i];
  }
  // Scaled problem: min |w|^2/2 + C sum hinge, C = 1/(N mu). f = mu * primal.
  const double C = 1.0 / (static_cast<double>(N) * data.mu);
  const Vector sq = A.rowwise().squaredNorm();
  Vector dual = Vector::Zero(static_cast<Eigen::Index>(N));
  Vector w = Vector::Zero(d);

  ReferenceSolution ref;
  ref.tolerance = tol;
  auto primal_value = [&](const Vector& x) {
    const Vector margins = b.cwiseProduct(A * x);
    return 0.5 * x.squaredNorm() + C * (1.0 - margins.array()).max(0.0).sum();
  };

  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(N); ++p) {
      if (sq(p) == 0.0) continue;
      const double grad = b(p) * A.row(p).dot(w) - 1.0;
      const double next = std::clamp(dual(p) - grad / sq(p), 0.0, C);
      if (next != dual(p)) {
        w.noalias() += (next - dual(p)) * b(p) * A.row(p).transpose();
        dual(p) = next;
      }
    }
    w = A.transpose() * dual.cwiseProduct(b);
    const double dual_value = dual.sum() - 0.5 * w.squaredNorm();
    const double gap = data.mu * (primal_value(w) - dual_value);
    ref.epochs = epoch;
    ref.certificate = gap;
    if (gap < tol) {
      ref.converged = true;
      break;
    }
  }
  ref.x_star = w;
  ref.f_star = GlobalObjective(data).value(w);
  return ref;
}

PilotEstimates pilot_estimates(const GlobalObjective& objective, const ReferenceSolution& ref) {
  PilotEstimates p;
  for (int t = 0; t <= 10; ++t) {
    const Vector x = (static_cast<double>(t) / 10.0) * ref.x_star;
    for (std::size_t i = 0; i < objective.num_nodes(); ++i)
      p.Omega2 = std::max(p.Omega2, objective.local(i).subgradient(x).squaredNorm());
  }
  p.R_prox = std::sqrt(0.5 * ref.x_star.squaredNorm());
  p.L_hat = std::sqrt(p.Omega2);
  return p;
}

// ------------------------------------------------------------------- bounds

double theorem1_bound(const ScheduleSet& s, std::size_t n, std::size_t K, double lambda) {
  if (!(lambda < 1.0)) throw std::invalid_argument("theorem1_bound: lambda must be < 1");
  if (K == 0 || n == 0) throw std::invalid_argument("theorem1_bound: K and n must be positive");
  const double Kd = static_cast<double>(K);
  const double log_term = std::log(Kd * std::sqrt(static_cast<double>(n)));
  return 20.0 * s.R_prox * log_term /
         (std::pow(Kd, (1.0 - s.gamma) / 2.0) * std::sqrt(1.0 - lambda)) * s.xi;
}

double theorem2_bound(double c0, double c1, double gamma, double Delta, double sigma2,
                      double Omega2, double U, double L_hat, std::size_t K, std::size_t d,
                      std::size_t num_edges) {
  if (!(U > L_hat)) return 0.0;
  const double spread = U - L_hat;
  const double load = c0 * c0 * Delta * Delta / 2.0 + c0 * c0 * sigma2 / (2.0 * gamma * c1) + Omega2;
  const double base = 1.0 - load / (spread * spread);
  if (base <= 0.0) return 0.0;
  const double exponent = 2.0 * static_cast<double>(K) * static_cast<double>(d) *
                          static_cast<double>(num_edges);
  return std::pow(base, exponent);
}

double power_bound(std::size_t n, std::size_t d, double c1, double U, double tau, std::size_t K) {
  return static_cast<double>(n) * static_cast<double>(d) * c1 * U * U *
         std::pow(static_cast<double>(K), tau) / (tau + 1.0);
}

// --------------------------------------------------------------- statistics

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, StreamTag::kReplication, {index});
}

SuccessEstimate estimate_success_probability(const EngineConfig& config,
                                             const GlobalObjective& objective,
                                             std::size_t trials, std::uint64_t seed, double bound,
                                             unsigned threads, double f_star,
                                             std::vector<RunRecord>* records) {
  if (trials == 0) throw std::invalid_argument("estimate_success_probability: trials must be >= 1");
  std::vector<RunRecord> local(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    EngineConfig c = config;
    c.warm_restart = false;
    c.seed = replication_seed(seed, t);
    local[t] = run(c, objective, f_star);
  });
  SuccessEstimate est;
  est.trials = trials;
  for (const auto& r : local)
    if (r.succeeded()) ++est.successes;
  est.p_hat = static_cast<double>(est.successes) / static_cast<double>(trials);
  std::tie(est.wilson_lo, est.wilson_hi) = wilson_interval(est.successes, trials);
  est.bound = bound;
  if (records) *records = std::move(local);
  return est;
}

// ---------------------------------------------------------- noise pipeline

std::vector<NoiseAccumulationPoint> noise_accumulation_study(
    const std::function<double(std::size_t)>& alpha_fn,
    const std::function<double(std::size_t)>& beta_fn, const ChannelSpec& channel,
    const QuantizerSpec& quantizer, const std::vector<std::size_t>& checkpoints,
    std::size_t links, std::size_t d, std::uint64_t seed) {
  if (checkpoints.empty() || links == 0 || d == 0)
    throw std::invalid_argument("noise_accumulation_study: empty study");
  const std::size_t K = *std::max_element(checkpoints.begin(), checkpoints.end());
  const auto dim = static_cast<Eigen::Index>(d);
  const double walk_step = quantizer.bypass() ? 0.05 : 0.01 * quantizer.range;
  const double walk_limit = quantizer.bypass() ? 1.0 : 0.25 * quantizer.range;

  struct State {
    Vector z, proxy, estimate;
    RandomStream q, ch, walk;
  };
  std::vector<State> st;
  st.reserve(links);
  for (std::size_t l = 0; l < links; ++l)
    st.push_back(State{Vector::Zero(dim), Vector::Zero(dim), Vector::Zero(dim),
                       RandomStream(seed, StreamTag::kNoiseStudy, {l, 0}),
                       RandomStream(seed, StreamTag::kNoiseStudy, {l, 1}),
                       RandomStream(seed, StreamTag::kNoiseStudy, {l, 2})});

  std::vector<NoiseAccumulationPoint> out;
  double inv_alpha_sq = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double a = alpha_fn(k);
    inv_alpha_sq += 1.0 / (a * a);
    for (State& s : st) {
      const Vector omega = s.z - s.proxy;
      QuantizeOutcome q = quantize(quantizer, omega, s.q);
      if (q.saturated) throw std::runtime_error("noise_accumulation_study: quantizer saturated");
      s.proxy += q.value;
      s.estimate += transmit(channel, a * q.value, s.ch) / a;
      for (Eigen::Index c = 0; c < dim; ++c)
        s.z(c) = std::clamp(s.z(c) + walk_step * s.walk.normal(), -walk_limit, walk_limit);
    }
    if (std::find(checkpoints.begin(), checkpoints.end(), k) == checkpoints.end()) continue;
    double sum = 0.0, sum_sq = 0.0;
    for (const State& s : st) {
      const Vector e = s.estimate - s.proxy;
      sum += e.sum();
      sum_sq += e.squaredNorm();
    }
    const double count = static_cast<double>(links * d);
    const double mean = sum / count;
    const double var = (sum_sq - count * mean * mean) / (count - 1.0);
    NoiseAccumulationPoint p;
    p.k = k;
    p.var_discrepancy = var;
    p.beta = beta_fn(k);
    p.var_scaled = p.beta * p.beta * var;
    p.predicted = channel.sigma2 * inv_alpha_sq;
    out.push_back(p);
  }
  return out;
}

// -------------------------------------------------------------- experiments

std::vector<SeriesSpec> default_convergence_series() {
  return {{"noiseless", Variant::NoiselessBaseline, 0.0},
          {"naive", Variant::NaiveDlmd, 0.0},
          {"diffex_g0.1", Variant::DiffEx, 0.1},
          {"diffex_g0.5", Variant::DiffEx, 0.5}};
}

BaselineSchedule baseline_schedule(double R_prox, double Omega2, double Delta, std::size_t d) {
  const double xi0 = std::sqrt(Omega2 + Delta * Delta * static_cast<double>(d) / 4.0);
  if (!(xi0 > 0.0)) throw std::invalid_argument("baseline_schedule: xi0 must be positive");
  return BaselineSchedule{R_prox / (4.0 * xi0)};
}

namespace {

struct ProblemSetup {
  SvmDataset data;
  ReferenceSolution reference;
  PilotEstimates pilot;
};

ProblemSetup prepare_problem(const SvmDataOptions& opts) {
  ProblemSetup s;
  s.data = generate_svm_data(opts);
  s.reference = solve_reference(s.data);
  if (!s.reference.converged)
    throw std::runtime_error("reference solver did not reach its tolerance");
  GlobalObjective objective(s.data);
  s.pilot = pilot_estimates(objective, s.reference);
  return s;
}

std::vector<double> mean_over_runs(const std::vector<LabeledRun>& runs,
                                   double IterationMetrics::*field) {
  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (const auto& r : runs) len = std::min(len, r.record.iterations.size());
  if (runs.empty()) len = 0;
  std::vector<double> mean(len, 0.0);
  for (const auto& r : runs)
    for (std::size_t k = 0; k < len; ++k) mean[k] += r.record.iterations[k].*field;
  for (double& v : mean) v /= static_cast<double>(runs.size());
  return mean;
}

}  // namespace

ConvergenceResult run_convergence(const ConvergenceSettings& st) {
  ConvergenceResult result;
  ProblemSetup setup = prepare_problem(st.data);
  result.reference = setup.reference;
  result.pilot = setup.pilot;
  result.R_prox = st.R_prox > 0.0 ? st.R_prox : setup.pilot.R_prox;
  result.Omega2 = st.Omega2 > 0.0 ? st.Omega2 : setup.pilot.Omega2;
  const GlobalObjective objective(setup.data);
  const std::size_t d = setup.data.d;
  const std::vector<SeriesSpec> series_list =
      st.series.empty() ? default_convergence_series() : st.series;
  const QuantizerSpec quantizer{st.rate_bits, st.U};
  const double Delta = quantizer.resolution();

  std::vector<EngineConfig> configs;
  for (const std::string& topo_name : st.topologies) {
    const Topology topo = make_topology(topo_name, st.data.n);
    const double lambda = spectral_info(topo).lambda;
    for (const SeriesSpec& spec : series_list) {
      SeriesResult sr;
      sr.spec = spec;
      sr.topology = topo_name;
      sr.lambda = lambda;
      EngineConfig cfg;
      cfg.topology = topo;
      cfg.quantizer = quantizer;
      cfg.channel = ChannelSpec{st.sigma2, st.noise_family};
      cfg.prox = ProximalMap(st.prox);
      cfg.batch_size = st.batch_size;
      cfg.horizon = st.horizon;
      cfg.variant = spec.variant;
      RunLabel label;
      label.experiment_id = st.experiment_id;
      label.variant = spec.name;
      label.topology = topo_name;
      label.c0 = st.c0;
      label.c1 = st.c1;
      label.sigma2 = st.sigma2;
      label.rate_bits = st.rate_bits;
      label.U = st.U;
      if (spec.variant == Variant::DiffEx) {
        sr.schedules = make_schedules(spec.gamma, st.c0, st.c1, result.R_prox, result.Omega2,
                                      Delta, st.sigma2, d, lambda);
        sr.theorem1 = theorem1_bound(sr.schedules, st.data.n, st.horizon, lambda);
        cfg.schedule = sr.schedules;
        label.gamma = sr.schedules.gamma;
        label.tau = sr.schedules.tau;
      } else {
        cfg.schedule = baseline_schedule(result.R_prox, result.Omega2, Delta, d);
        label.c0 = label.c1 = 1.0;
        if (spec.variant == Variant::NoiselessBaseline) {
          label.sigma2 = 0.0;
          label.rate_bits = 0;
        }
      }
      for (std::size_t r = 0; r < st.replications; ++r) {
        label.seed = replication_seed(st.seed, r);
        sr.runs.push_back(LabeledRun{label, {}});
        cfg.seed = label.seed;
        configs.push_back(cfg);
      }
      result.series.push_back(std::move(sr));
    }
  }

  std::vector<RunRecord*> slots;
  for (auto& sr : result.series)
    for (auto& lr : sr.runs) slots.push_back(&lr.record);
  parallel_for(configs.size(), st.threads,
               [&](std::size_t j) { *slots[j] = run(configs[j], objective, result.reference.f_star); });

  for (auto& sr : result.series) {
    sr.mean_gap_avg = mean_over_runs(sr.runs, &IterationMetrics::gap_avg);
    sr.mean_avg_iterate_gap = mean_over_runs(sr.runs, &IterationMetrics::avg_iterate_gap);
  }
  return result;
}

SweepResult run_saturation_sweep(const SweepSettings& st) {
  SweepResult result;
  ProblemSetup setup = prepare_problem(st.data);
  result.reference = setup.reference;
  result.pilot = setup.pilot;
  result.R_prox = st.R_prox > 0.0 ? st.R_prox : setup.pilot.R_prox;
  result.Omega2 = st.Omega2 > 0.0 ? st.Omega2 : setup.pilot.Omega2;
  result.L_hat = setup.pilot.L_hat;
  const GlobalObjective objective(setup.data);
  const std::size_t d = setup.data.d;

  for (const std::string& topo_name : st.topologies) {
    const Topology topo = make_topology(topo_name, st.data.n);
    const double lambda = spectral_info(topo).lambda;
    for (double U : st.U_values) {
      SweepPoint pt;
      pt.topology = topo_name;
      pt.U = U;
      pt.lambda = lambda;
      pt.num_edges = topo.num_edges();
      EngineConfig cfg;
      cfg.topology = topo;
      cfg.quantizer = QuantizerSpec{st.rate_bits, U};
      cfg.channel = ChannelSpec{st.sigma2, st.noise_family};
      cfg.batch_size = st.batch_size;
      cfg.horizon = st.horizon;
      cfg.variant = Variant::DiffEx;
      const double Delta = cfg.quantizer.resolution();
      const ScheduleSet sched = make_schedules(st.gamma, st.c0, st.c1, result.R_prox,
                                               result.Omega2, Delta, st.sigma2, d, lambda);
      cfg.schedule = sched;
      const double bound = theorem2_bound(st.c0, st.c1, st.gamma, Delta, st.sigma2, result.Omega2,
                                          U, result.L_hat, st.horizon, d, pt.num_edges);
      std::vector<RunRecord> records;
      pt.estimate = estimate_success_probability(cfg, objective, st.trials, st.seed, bound,
                                                 st.threads, result.reference.f_star,
                                                 st.keep_records ? &records : nullptr);
      for (std::size_t t = 0; t < records.size(); ++t) {
        RunLabel label;
        label.experiment_id = st.experiment_id;
        label.variant = "diffex";
        label.topology = topo_name;
        label.gamma = sched.gamma;
        label.tau = sched.tau;
        label.c0 = st.c0;
        label.c1 = st.c1;
        label.sigma2 = st.sigma2;
        label.rate_bits = st.rate_bits;
        label.U = U;
        label.seed = records[t].seed;
        pt.runs.push_back(LabeledRun{std::move(label), std::move(records[t])});
      }
      result.points.push_back(std::move(pt));
    }
  }
  return result;
}

// ---------------------------------------------------------------------- CSV

const char* const kRunCsvHeader =
    "experiment_id,variant,topology,gamma,tau,c0,c1,sigma2,rate_bits,U,seed,k,gap_avg,"
    "gap_node_max,consensus_err_max,power_avg,status";

std::string format_number(double v) { return fmt::format("{}", v); }

namespace {

std::ofstream open_for_write(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

void finish(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

std::string label_prefix(const RunLabel& l) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", l.experiment_id, l.variant, l.topology,
                     format_number(l.gamma), format_number(l.tau), format_number(l.c0),
                     format_number(l.c1), format_number(l.sigma2), l.rate_bits,
                     format_number(l.U), l.seed);
}

}  // namespace

void emit_csv(const std::vector<LabeledRun>& runs, const std::string& path) {
  std::ofstream os = open_for_write(path);
  os << kRunCsvHeader << '\n';
  for (const LabeledRun& run : runs) {
    const std::string prefix = label_prefix(run.label);
    for (const IterationMetrics& m : run.record.iterations) {
      os << prefix << ',' << m.k << ',' << format_number(m.gap_avg) << ','
         << format_number(m.gap_node_max) << ',' << format_number(m.consensus_err_max) << ','
         << format_number(m.power_avg) << ",ok\n";
    }
    if (run.record.status == RunStatus::Failure)
      os << prefix << ',' << run.record.failed_at << ",nan,nan,nan,nan,failure\n";
  }
  finish(os, path);
}

void emit_success_csv(const std::string& experiment_id, const std::vector<SweepPoint>& points,
                      const std::string& path) {
  std::ofstream os = open_for_write(path);
  os << "experiment_id,topology,U,lambda,num_edges,trials,successes,p_hat,wilson_lo,wilson_hi,"
        "theorem2_bound\n";
  for (const SweepPoint& p : points) {
    const SuccessEstimate& e = p.estimate;
    os << experiment_id << ',' << p.topology << ',' << format_number(p.U) << ','
       << format_number(p.lambda) << ',' << p.num_edges << ',' << e.trials << ',' << e.successes
       << ',' << format_number(e.p_hat) << ',' << format_number(e.wilson_lo) << ','
       << format_number(e.wilson_hi) << ',' << format_number(e.bound) << '\n';
  }
  finish(os, path);
}

void emit_mean_curves(const std::vector<SeriesResult>& series, const std::string& path) {
  std::ofstream os = open_for_write(path);
  os << 'k';
  std::size_t len = 0;
  for (const SeriesResult& s : series) {
    os << ',' << s.topology << ':' << s.spec.name;
    len = std::max(len, s.mean_gap_avg.size());
  }
  os << '\n';
  for (std::size_t k = 0; k < len; ++k) {
    os << (k + 1);
    for (const SeriesResult& s : series) {
      os << ',';
      if (k < s.mean_gap_avg.size()) os << format_number(s.mean_gap_avg[k]);
    }
    os << '\n';
  }
  finish(os, path);
}

}  // namespace dlmd
