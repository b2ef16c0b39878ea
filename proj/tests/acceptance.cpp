// Acceptance checks. Each criterion prints one [PASS]/[FAIL] line; detail
// lines are indented above it. Exit status is nonzero if any selected
// criterion fails.
#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dlmd/dlmd.hpp"
#include "oracles.hpp"

using namespace dlmd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string summary;
};

void detail(const std::string& line) { fmt::print("  {}\n", line); }

// Shared experiment runs, computed on first use.
const ConvergenceResult& convergence_runs() {
  static const ConvergenceResult result = [] {
    ConvergenceSettings st;
    st.experiment_id = "convergence";
    st.data.class_mean_scale = 1.5;
    return run_convergence(st);
  }();
  return result;
}

SweepSettings sweep_settings() {
  SweepSettings st;
  st.experiment_id = "saturation";
  st.data.class_mean_scale = 0.5;
  st.gamma = 0.5;
  return st;
}

const SweepResult& sweep_runs() {
  static const SweepResult result = run_saturation_sweep(sweep_settings());
  return result;
}

const SeriesResult* find_series(const ConvergenceResult& r, const std::string& topo,
                                const std::string& name) {
  for (const auto& s : r.series)
    if (s.topology == topo && s.spec.name == name) return &s;
  return nullptr;
}

double mean_final_gap(const SeriesResult& s) {
  double sum = 0.0;
  for (const auto& run : s.runs) sum += run.record.last()->gap_avg;
  return sum / static_cast<double>(s.runs.size());
}

// ------------------------------------------------------------------ C1
Verdict quantizer_moments() {
  const auto t0 = Clock::now();
  const QuantizerSpec spec{3, 1.0};
  const double delta = resolution(spec);
  RandomStream pick(101);
  Vector v(20);
  for (Eigen::Index i = 0; i < 20; ++i) v(i) = -1.0 + 2.0 * pick.uniform();

  const int draws = 1000000;
  RandomStream rng(102);
  std::vector<long double> sum(20, 0.0L), sum_sq(20, 0.0L);
  for (int t = 0; t < draws; ++t) {
    const Vector q = quantize(spec, v, rng).value;
    for (Eigen::Index i = 0; i < 20; ++i) {
      const long double e = q(i) - v(i);
      sum[i] += e;
      sum_sq[i] += e * e;
    }
  }
  double worst_bias = 0.0, worst_var_ratio = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const long double mean = sum[i] / draws;
    const long double var = sum_sq[i] / draws - mean * mean;
    worst_bias = std::max(worst_bias, static_cast<double>(std::abs(mean)));
    worst_var_ratio = std::max(worst_var_ratio, static_cast<double>(var / (delta * delta / 4.0)));
  }
  const double bias_limit = 4.0 * (delta / 2.0) / 1e3;
  const double elapsed = seconds_since(t0);
  Verdict v1;
  v1.pass = worst_bias < bias_limit && worst_var_ratio <= 1.02 && elapsed < 5.0;
  v1.summary = fmt::format("max |bias| {:.3g} < {:.3g}, max var/(D^2/4) {:.4f} <= 1.02, {:.2f}s",
                           worst_bias, bias_limit, worst_var_ratio, elapsed);
  return v1;
}

// ------------------------------------------------------------------ C2
Verdict noise_accumulation() {
  const auto t0 = Clock::now();
  const ChannelSpec ch{0.1};
  const QuantizerSpec q{6, 10.0};
  const std::vector<std::size_t> checkpoints{100, 400, 1600};
  const auto flat = noise_accumulation_study([](std::size_t) { return 1.0; },
                                             [](std::size_t) { return 1.0; }, ch, q, checkpoints,
                                             2000, 5, 201);
  const double r1 = flat[1].var_discrepancy / flat[0].var_discrepancy;
  const double r2 = flat[2].var_discrepancy / flat[1].var_discrepancy;
  const bool linear = std::abs(r1 / 4.0 - 1.0) <= 0.1 && std::abs(r2 / 4.0 - 1.0) <= 0.1;
  for (const auto& p : flat)
    detail(fmt::format("unit sequences k={} var {:.4g} (sigma2*k = {:.4g})", p.k,
                       p.var_discrepancy, p.predicted));

  const ScheduleSet s = make_schedules(0.5, 1.0, 1.0, 1.0, 1.0, 0.0, 0.1, 5, 0.0);
  const auto tamed = noise_accumulation_study([&](std::size_t k) { return s.alpha(k); },
                                              [&](std::size_t k) { return s.beta(k); }, ch, q,
                                              {1600}, 2000, 5, 202);
  const double limit = 1.0 * 0.1 / (2.0 * 0.5 * 1.0) * 1.1;
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.pass = linear && tamed[0].var_scaled <= limit && elapsed < 10.0;
  v.summary = fmt::format("ratios {:.3f}, {:.3f} (4 +/- 10%); scaled var at 1600 {:.4f} <= {:.3f}; {:.2f}s",
                          r1, r2, tamed[0].var_scaled, limit, elapsed);
  return v;
}

// ------------------------------------------------------------------ C3
Verdict mixing_bound() {
  const auto t0 = Clock::now();
  const std::size_t n = 10, K = 200;
  const double c0 = 1.0;
  RandomStream rng(301);
  std::vector<Vector> xs;
  for (int t = 0; t < 50; ++t) xs.push_back(oracle::random_simplex(n, rng));
  const Vector uniform = Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));

  std::size_t checks = 0, violations = 0;
  double worst_margin = -1.0;
  for (const char* name : {"ring2", "complete"}) {
    const Topology topo = make_topology(name, n);
    const double lambda = spectral_info(topo).lambda;
    for (double gamma : {0.1, 0.5}) {
      for (std::size_t s = 1; s <= K; ++s) {
        std::vector<Vector> cur = xs;
        for (std::size_t k = s; k <= K; ++k) {
          const Matrix W = mixing_matrix(topo, c0 * std::pow(static_cast<double>(k), -gamma));
          const double bound = oracle::mixing_bound(c0, gamma, lambda, k, s);
          for (auto& x : cur) {
            x = W * x;
            const double dev = (x - uniform).norm();
            ++checks;
            worst_margin = std::max(worst_margin, dev - bound);
            if (dev > bound + 1e-12) ++violations;
          }
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.pass = violations == 0 && elapsed < 30.0;
  v.summary = fmt::format("{} checks, {} violations, max(dev - bound) {:.3g}, {:.2f}s", checks,
                          violations, worst_margin, elapsed);
  return v;
}

// ------------------------------------------------------------------ C4
Verdict consensus_bound() {
  const auto t0 = Clock::now();
  SvmDataOptions o;
  const SvmDataset ds = generate_svm_data(o);
  const GlobalObjective f(ds);
  const ReferenceSolution ref = solve_reference(ds);
  const PilotEstimates pilot = pilot_estimates(f, ref);
  const std::size_t n = 10, K = 500;
  const double c0 = 1.0;

  bool pass = true;
  for (const char* name : {"complete", "ring2"}) {
    const Topology topo = make_topology(name, n);
    const double lambda = spectral_info(topo).lambda;
    for (double gamma : {0.1, 0.5}) {
      EngineConfig c;
      c.topology = topo;
      c.schedule = make_schedules(gamma, c0, 1.0, pilot.R_prox, pilot.Omega2, 0.0, 0.0, ds.d, lambda);
      c.quantizer = QuantizerSpec::infinite_rate();
      c.channel = ChannelSpec{0.0};
      c.horizon = K;
      c.seed = 401;
      Simulation sim(c, f);
      double worst_ratio = 0.0;
      std::vector<double> dev;
      for (std::size_t k = 1; k <= K; ++k) {
        if (sim.step().status != RunStatus::Ok) {
          pass = false;
          break;
        }
        const Vector zbar = sim.dual_mean();
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d = std::max(d, (zbar - sim.dual(i)).norm());
        dev.push_back(d);
      }
      const double L = sim.lipschitz_hat();
      const double Kd = static_cast<double>(K);
      const double bound = 2.0 * L / (c0 * (1.0 - lambda)) * std::pow(Kd, gamma) *
                               std::log(Kd * std::sqrt(static_cast<double>(n))) +
                           3.0 * L;
      for (double d : dev) worst_ratio = std::max(worst_ratio, d / bound);
      pass = pass && worst_ratio <= 1.0;
      detail(fmt::format("{} gamma={} L_hat={:.4g} bound={:.4g} max dev/bound={:.4g}", name, gamma, L,
                         bound, worst_ratio));
    }
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.pass = pass && elapsed < 30.0;
  v.summary = fmt::format("consensus deviation within bound on all runs, {:.2f}s", elapsed);
  if (!pass) v.summary = fmt::format("bound exceeded or run failed, {:.2f}s", elapsed);
  return v;
}

// ------------------------------------------------------------------ C5
Verdict convergence_shape() {
  const auto t0 = Clock::now();
  const ConvergenceResult& r = convergence_runs();
  const double elapsed = seconds_since(t0);
  bool pass = elapsed < 300.0;
  std::vector<std::string> failed;
  for (const char* topo : {"complete", "ring2"}) {
    const SeriesResult* naive = find_series(r, topo, "naive");
    const SeriesResult* g1 = find_series(r, topo, "diffex_g0.1");
    const SeriesResult* g5 = find_series(r, topo, "diffex_g0.5");
    const SeriesResult* clean = find_series(r, topo, "noiseless");
    if (!naive || !g1 || !g5 || !clean) return {false, "missing series"};

    bool a_ok = true;
    for (const auto& run : naive->runs) {
      const auto& it = run.record.iterations;
      double lowest = it.front().gap_avg;
      for (const auto& m : it) lowest = std::min(lowest, m.gap_avg);
      const double final_gap = it.back().gap_avg;
      a_ok = a_ok && run.record.status == RunStatus::Ok && final_gap >= 2.0 * lowest;
      detail(fmt::format("{} naive seed {}: min {:.4g} final {:.4g} ({:.2f}x)", topo,
                         run.label.seed, lowest, final_gap, final_gap / lowest));
    }
    const double f1 = mean_final_gap(*g1), f5 = mean_final_gap(*g5), f0 = mean_final_gap(*clean);
    const bool b_ok = f1 < f5;
    const bool c_ok = f1 <= 3.0 * f0;
    detail(fmt::format("{} final gaps: noiseless {:.4g}, diffex g0.1 {:.4g}, diffex g0.5 {:.4g}",
                       topo, f0, f1, f5));
    detail(fmt::format("{} (a) {} (b) {} (c) g0.1/noiseless = {:.3f} {}", topo,
                       a_ok ? "ok" : "FAIL", b_ok ? "ok" : "FAIL", f1 / f0, c_ok ? "ok" : "FAIL"));
    if (!a_ok) failed.push_back(fmt::format("{}(a)", topo));
    if (!b_ok) failed.push_back(fmt::format("{}(b)", topo));
    if (!c_ok) failed.push_back(fmt::format("{}(c)", topo));
  }
  pass = pass && failed.empty();
  std::string which;
  for (const auto& f : failed) which += " " + f;
  Verdict v;
  v.pass = pass;
  v.summary = failed.empty() ? fmt::format("divergence, ordering and noiseless ratio hold, {:.1f}s", elapsed)
                             : fmt::format("failed:{}, {:.1f}s", which, elapsed);
  return v;
}

// ------------------------------------------------------------------ C6
Verdict theorem1_sanity() {
  const ConvergenceResult& r = convergence_runs();
  std::size_t checked = 0, violated = 0;
  double worst = 0.0;
  for (const auto& s : r.series) {
    if (s.spec.variant != Variant::DiffEx) continue;
    for (const auto& run : s.runs) {
      if (!run.record.succeeded()) continue;
      const ScheduleSet& base = s.schedules;
      const ScheduleSet measured =
          make_schedules(base.gamma, base.c0, base.c1, r.R_prox, run.record.omega2_hat, base.Delta,
                         base.sigma2, base.d, s.lambda);
      const std::size_t K = run.record.iterations.size();
      const double bound = theorem1_bound(measured, 10, K, s.lambda);
      const double gap = run.record.last()->avg_iterate_gap;
      ++checked;
      worst = std::max(worst, gap / bound);
      if (!(gap <= bound)) ++violated;
    }
  }
  Verdict v;
  v.pass = checked > 0 && violated == 0;
  v.summary = fmt::format("{} successful runs, {} above bound, max gap/bound {:.3g}", checked,
                          violated, worst);
  return v;
}

// ------------------------------------------------------------------ C7
Verdict saturation_sweep() {
  const auto t0 = Clock::now();
  const SweepResult& r = sweep_runs();
  const double elapsed = seconds_since(t0);
  std::map<std::string, std::vector<const SweepPoint*>> by_topo;
  for (const auto& p : r.points) by_topo[p.topology].push_back(&p);

  bool a_ok = true;
  for (auto& [topo, pts] : by_topo) {
    std::sort(pts.begin(), pts.end(), [](auto* x, auto* y) { return x->U < y->U; });
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const SuccessEstimate& e = pts[i]->estimate;
      detail(fmt::format("{} U={} p_hat={:.2f} [{:.3f}, {:.3f}] bound={:.3g}", topo, pts[i]->U,
                         e.p_hat, e.wilson_lo, e.wilson_hi, e.bound));
      if (i > 0 && e.wilson_hi < pts[i - 1]->estimate.wilson_lo) a_ok = false;
    }
  }
  bool b_ok = true;
  const auto& ring = by_topo["ring2"];
  const auto& complete = by_topo["complete"];
  for (const auto* pr : ring)
    for (const auto* pc : complete)
      if (pr->U == pc->U && pr->estimate.p_hat < pc->estimate.p_hat) {
        b_ok = false;
        detail(fmt::format("(b) U={} ring {:.2f} < complete {:.2f}", pr->U, pr->estimate.p_hat,
                           pc->estimate.p_hat));
      }
  bool c_ok = true;
  std::size_t positive = 0;
  for (const auto& p : r.points)
    if (p.estimate.bound > 0.0) {
      ++positive;
      c_ok = c_ok && p.estimate.p_hat >= p.estimate.bound;
    }
  Verdict v;
  v.pass = a_ok && b_ok && c_ok && elapsed < 300.0;
  v.summary = fmt::format("(a) {} (b) {} (c) {}{}, {:.1f}s", a_ok ? "ok" : "FAIL",
                          b_ok ? "ok" : "FAIL", c_ok ? "ok" : "FAIL",
                          positive == 0 ? " (bound is zero at every U)" : "", elapsed);
  return v;
}

// ------------------------------------------------------------------ C8
Verdict power_accounting() {
  std::size_t checked = 0, violated = 0;
  double worst = 0.0;
  const auto check = [&](const RunRecord& rec, std::size_t n, std::size_t d, double c1, double U,
                         double tau) {
    if (!rec.succeeded() || rec.iterations.empty()) return;
    const std::size_t K = rec.iterations.size();
    const double bound = power_bound(n, d, c1, U, tau, K);
    const double measured = rec.last()->power_max;
    ++checked;
    worst = std::max(worst, measured / bound);
    if (!(measured <= bound)) ++violated;
  };
  const ConvergenceResult& c = convergence_runs();
  const ConvergenceSettings cs;
  for (const auto& s : c.series) {
    const bool diffex = s.spec.variant == Variant::DiffEx;
    for (const auto& run : s.runs)
      check(run.record, 10, 30, diffex ? s.schedules.c1 : 1.0, cs.U, diffex ? s.schedules.tau : 0.0);
  }
  const SweepResult& w = sweep_runs();
  const SweepSettings ws = sweep_settings();
  const double tau = 1.0 - 2.0 * ws.gamma;
  for (const auto& p : w.points)
    for (const auto& run : p.runs) check(run.record, 10, 30, ws.c1, p.U, tau);
  Verdict v;
  v.pass = checked > 0 && violated == 0;
  v.summary = fmt::format("{} successful runs, {} above bound, max power/bound {:.3g}", checked,
                          violated, worst);
  return v;
}

// ------------------------------------------------------------------ C9
Verdict rate_exponent() {
  const auto t0 = Clock::now();
  ConvergenceSettings st;
  st.experiment_id = "rate";
  st.data.class_mean_scale = 1.5;
  st.topologies = {"complete"};
  st.series = {SeriesSpec{"diffex_g0.5", Variant::DiffEx, 0.5}};
  st.horizon = 2000;
  st.replications = 5;
  const ConvergenceResult r = run_convergence(st);
  const auto& curve = r.series.front().mean_gap_avg;
  if (curve.size() < 2000) return {false, "runs did not reach K = 2000"};
  std::vector<double> lx, ly;
  for (std::size_t K : {250u, 500u, 1000u, 2000u}) {
    lx.push_back(std::log(static_cast<double>(K)));
    ly.push_back(std::log(curve[K - 1]));
    detail(fmt::format("K={} mean gap {:.5g}", K, curve[K - 1]));
  }
  const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4.0;
  const double my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.pass = slope <= -0.25 + 0.15 && elapsed < 600.0;
  v.summary = fmt::format("log-log slope {:.4f} <= -0.10, {:.1f}s", slope, elapsed);
  return v;
}

// ------------------------------------------------------------------ C10
std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> emit_all(const std::filesystem::path& dir, unsigned threads) {
  std::filesystem::create_directories(dir);
  ConvergenceSettings cs;
  cs.experiment_id = "determinism";
  cs.horizon = 200;
  cs.replications = 3;
  cs.threads = threads;
  const ConvergenceResult c = run_convergence(cs);
  std::vector<LabeledRun> runs;
  for (const auto& s : c.series) runs.insert(runs.end(), s.runs.begin(), s.runs.end());
  emit_csv(runs, (dir / "runs.csv").string());
  emit_mean_curves(c.series, (dir / "curves.csv").string());

  SweepSettings ws = sweep_settings();
  ws.trials = 20;
  ws.threads = threads;
  const SweepResult w = run_saturation_sweep(ws);
  std::vector<LabeledRun> sweep_runs;
  for (const auto& p : w.points) sweep_runs.insert(sweep_runs.end(), p.runs.begin(), p.runs.end());
  emit_csv(sweep_runs, (dir / "sweep_runs.csv").string());
  emit_success_csv(ws.experiment_id, w.points, (dir / "success.csv").string());

  std::vector<std::string> out;
  for (const char* f : {"runs.csv", "curves.csv", "sweep_runs.csv", "success.csv"})
    out.push_back(slurp(dir / f));
  return out;
}

Verdict determinism() {
  const auto base = std::filesystem::temp_directory_path() /
                    fmt::format("dlmd_acceptance_{}", static_cast<long>(::getpid()));
  const auto a = emit_all(base / "a", 1);
  const auto b = emit_all(base / "b", 1);
  const auto c = emit_all(base / "c", 4);
  std::filesystem::remove_all(base);
  std::size_t bytes = 0;
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    bytes += a[i].size();
    same = same && a[i] == b[i] && a[i] == c[i] && !a[i].empty();
  }
  Verdict v;
  v.pass = same;
  v.summary = fmt::format("4 CSV files ({} bytes) {} across repeat and thread count", bytes,
                          same ? "identical" : "DIFFER");
  return v;
}

const std::vector<std::pair<std::string, std::function<Verdict()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Verdict()>>> list{
      {"quantizer moments", quantizer_moments},
      {"noise accumulation", noise_accumulation},
      {"mixing bound", mixing_bound},
      {"consensus-error bound", consensus_bound},
      {"convergence figure shape", convergence_shape},
      {"averaged-iterate bound", theorem1_sanity},
      {"saturation sweep", saturation_sweep},
      {"power accounting", power_accounting},
      {"rate exponent", rate_exponent},
      {"determinism", determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "Criterion number (1-10); repeatable. Default: all")
      ->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (int i = 1; i <= 10; ++i) selected.push_back(i);

  int failures = 0;
  for (int id : selected) {
    const auto& [name, fn] = criteria()[static_cast<std::size_t>(id - 1)];
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, fmt::format("exception: {}", e.what())};
    }
    fmt::print("[{}] C{} {}: {}\n", v.pass ? "PASS" : "FAIL", id, name, v.summary);
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
