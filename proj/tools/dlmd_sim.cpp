// dlmd_sim: run the convergence, saturation-sweep and noise-accumulation
// experiments and write CSV files plus a manifest into an output directory.
#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/os.h>

#include <chrono>
#include <filesystem>
#include <fstream>

#include "config.hpp"
#include "dlmd/dlmd.hpp"

namespace fs = std::filesystem;
using namespace dlmd;
using dlmd::tools::SimConfig;

namespace {

struct Common {
  std::string config;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

SimConfig resolve(const Common& o) {
  SimConfig c = o.config.empty() ? tools::default_config() : tools::load_config(o.config);
  if (o.seed) c.convergence.seed = c.sweep.seed = c.noise.seed = *o.seed;
  if (o.threads) c.convergence.threads = c.sweep.threads = *o.threads;
  return c;
}

class Manifest {
 public:
  Manifest(std::string command, const Common& o) : command_(std::move(command)), opts_(o) {}
  void add(const std::string& key, const std::string& value) { lines_.push_back(key + " = " + value); }
  void add(const std::string& key, double value) { add(key, format_number(value)); }
  void file(const fs::path& p) { files_.push_back(p.filename().string()); }

  void write(const fs::path& dir, const SimConfig& c, double seconds) const {
    std::ofstream os(dir / "manifest.txt");
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", (dir / "manifest.txt").string()));
    os << "command = " << command_ << "\n";
    os << "config = " << (opts_.config.empty() ? "(defaults)" : opts_.config) << "\n";
    for (const auto& l : lines_) os << l << "\n";
    for (const auto& f : files_) os << "output = " << f << "\n";
    os << "elapsed_seconds = " << fmt::format("{:.3f}", seconds) << "\n";
    if (!c.source.empty()) os << "\n# config file\n" << c.source;
  }

 private:
  std::string command_;
  Common opts_;
  std::vector<std::string> lines_;
  std::vector<std::string> files_;
};

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string join(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(format_number(x));
  return join(parts);
}

void describe_data(Manifest& m, const SvmDataOptions& d) {
  m.add("n", std::to_string(d.n));
  m.add("m", std::to_string(d.m));
  m.add("d", std::to_string(d.d));
  m.add("mu", d.mu);
  m.add("class_mean_scale", d.class_mean_scale);
  m.add("class_std", d.class_std);
  m.add("polarized", d.polarized ? "true" : "false");
  m.add("data_seed", std::to_string(d.seed));
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_convergence(const Common& o, const std::optional<std::string>& variant,
                    std::optional<std::size_t> reps) {
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig c = resolve(o);
  auto& st = c.convergence;
  if (variant) c.variant = parse_variant(*variant);
  if (reps) st.replications = *reps;
  if (c.variant) {
    std::vector<SeriesSpec> keep;
    for (const auto& s : st.series)
      if (s.variant == *c.variant) keep.push_back(s);
    if (keep.empty()) throw std::invalid_argument("no series left after the variant filter");
    st.series = keep;
  }
  const ConvergenceResult r = run_convergence(st);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  Manifest m("convergence", o);
  m.add("experiment_id", st.experiment_id);
  m.add("topology", join(st.topologies));
  describe_data(m, st.data);
  {
    std::vector<std::string> names;
    for (const auto& s : st.series) names.push_back(s.name);
    m.add("series", join(names));
  }
  m.add("rate_bits", std::to_string(st.rate_bits));
  m.add("dynamic_range_U", st.U);
  m.add("sigma2", st.sigma2);
  m.add("noise_family", to_string(st.noise_family));
  m.add("c0", st.c0);
  m.add("c1", st.c1);
  m.add("horizon_K", std::to_string(st.horizon));
  m.add("replications", std::to_string(st.replications));
  m.add("batch_size", std::to_string(st.batch_size));
  m.add("prox", to_string(st.prox));
  m.add("seed", std::to_string(st.seed));
  m.add("f_star", r.reference.f_star);
  m.add("reference_certificate", r.reference.certificate);
  m.add("R_prox", r.R_prox);
  m.add("Omega2", r.Omega2);
  std::vector<LabeledRun> runs;
  for (const auto& s : r.series) {
    runs.insert(runs.end(), s.runs.begin(), s.runs.end());
    m.add(fmt::format("lambda[{}]", s.topology), s.lambda);
    if (s.spec.variant == Variant::DiffEx)
      m.add(fmt::format("theorem1_bound[{}/{}]", s.topology, s.spec.name), s.theorem1);
    std::size_t ok = 0;
    for (const auto& run : s.runs) ok += run.record.status == RunStatus::Ok;
    m.add(fmt::format("completed_runs[{}/{}]", s.topology, s.spec.name),
          fmt::format("{}/{}", ok, s.runs.size()));
  }
  emit_csv(runs, (dir / "runs.csv").string());
  m.file(dir / "runs.csv");
  emit_mean_curves(r.series, (dir / "mean_curves.csv").string());
  m.file(dir / "mean_curves.csv");
  m.write(dir, c, elapsed(t0));
  fmt::print("f* = {}  R_prox = {}  Omega2 = {}\n", format_number(r.reference.f_star),
             format_number(r.R_prox), format_number(r.Omega2));
  for (const auto& s : r.series)
    if (!s.mean_gap_avg.empty())
      fmt::print("{:<10} {:<14} final mean gap {:.5g}\n", s.topology, s.spec.name, s.mean_gap_avg.back());
  fmt::print("wrote {}\n", dir.string());
  return 0;
}

int cmd_sweep(const Common& o, std::optional<std::size_t> trials) {
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig c = resolve(o);
  auto& st = c.sweep;
  if (trials) st.trials = *trials;
  const SweepResult r = run_saturation_sweep(st);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  Manifest m("saturation-sweep", o);
  m.add("experiment_id", st.experiment_id);
  m.add("topology", join(st.topologies));
  describe_data(m, st.data);
  m.add("U_values", join(st.U_values));
  m.add("rate_bits", std::to_string(st.rate_bits));
  m.add("sigma2", st.sigma2);
  m.add("noise_family", to_string(st.noise_family));
  m.add("gamma", st.gamma);
  m.add("c0", st.c0);
  m.add("c1", st.c1);
  m.add("horizon_K", std::to_string(st.horizon));
  m.add("batch_size", std::to_string(st.batch_size));
  m.add("seed", std::to_string(st.seed));
  m.add("f_star", r.reference.f_star);
  m.add("R_prox", r.R_prox);
  m.add("Omega2", r.Omega2);
  m.add("L_hat", r.L_hat);
  m.add("trials", std::to_string(st.trials));
  std::vector<LabeledRun> runs;
  for (const auto& p : r.points) runs.insert(runs.end(), p.runs.begin(), p.runs.end());
  emit_csv(runs, (dir / "runs.csv").string());
  m.file(dir / "runs.csv");
  emit_success_csv(st.experiment_id, r.points, (dir / "success.csv").string());
  m.file(dir / "success.csv");
  m.write(dir, c, elapsed(t0));
  for (const auto& p : r.points)
    fmt::print("{:<10} U={:<5} p_hat={:.3f} [{:.3f}, {:.3f}] bound={:.3g}\n", p.topology, p.U,
               p.estimate.p_hat, p.estimate.wilson_lo, p.estimate.wilson_hi, p.estimate.bound);
  fmt::print("wrote {}\n", dir.string());
  return 0;
}

int cmd_noise(const Common& o) {
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig c = resolve(o);
  const auto& ns = c.noise;
  const ChannelSpec ch{ns.sigma2, ns.noise_family};
  const QuantizerSpec q{ns.rate_bits, ns.U};
  const ScheduleSet s = make_schedules(ns.gamma, ns.c0, ns.c1, 1.0, 1.0, 0.0, ns.sigma2, ns.d, 0.0);

  const auto flat = noise_accumulation_study([](std::size_t) { return 1.0; },
                                             [](std::size_t) { return 1.0; }, ch, q,
                                             ns.checkpoints, ns.links, ns.d, ns.seed);
  const auto sched = noise_accumulation_study([&](std::size_t k) { return s.alpha(k); },
                                              [&](std::size_t k) { return s.beta(k); }, ch, q,
                                              ns.checkpoints, ns.links, ns.d, ns.seed);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const fs::path csv = dir / "noise_accumulation.csv";
  {
    auto out = fmt::output_file(csv.string());
    out.print("experiment_id,schedule,k,var_discrepancy,var_scaled,predicted,beta\n");
    const auto rows = [&](const char* name, const auto& pts) {
      for (const auto& p : pts)
        out.print("{},{},{},{},{},{},{}\n", ns.experiment_id, name, p.k,
                  format_number(p.var_discrepancy), format_number(p.var_scaled),
                  format_number(p.predicted), format_number(p.beta));
    };
    rows("unit", flat);
    rows("diffex", sched);
  }
  Manifest m("noise-accumulation", o);
  m.add("experiment_id", ns.experiment_id);
  m.add("sigma2", ns.sigma2);
  m.add("noise_family", to_string(ns.noise_family));
  m.add("rate_bits", std::to_string(ns.rate_bits));
  m.add("dynamic_range_U", ns.U);
  m.add("gamma", ns.gamma);
  m.add("c0", ns.c0);
  m.add("c1", ns.c1);
  {
    std::vector<std::string> ks;
    for (auto k : ns.checkpoints) ks.push_back(std::to_string(k));
    m.add("checkpoints", join(ks));
  }
  m.add("links", std::to_string(ns.links));
  m.add("noise_dim", std::to_string(ns.d));
  m.add("seed", std::to_string(ns.seed));
  m.add("scaled_limit", ns.c0 * ns.c0 * ns.sigma2 / (2.0 * ns.gamma * ns.c1));
  m.file(csv);
  m.write(dir, c, elapsed(t0));
  for (std::size_t i = 0; i < flat.size(); ++i)
    fmt::print("k={:<6} unit var {:.5g} (predicted {:.5g})  diffex scaled var {:.5g}\n", flat[i].k,
               flat[i].var_discrepancy, flat[i].predicted, sched[i].var_scaled);
  fmt::print("wrote {}\n", dir.string());
  return 0;
}

int cmd_bounds(const Common& o) {
  const SimConfig c = resolve(o);
  const auto& cv = c.convergence;
  const auto& sw = c.sweep;
  const SvmDataset ds = generate_svm_data(cv.data);
  const GlobalObjective f(ds);
  const ReferenceSolution ref = solve_reference(ds);
  const PilotEstimates pilot = pilot_estimates(f, ref);
  const double R = cv.R_prox > 0 ? cv.R_prox : pilot.R_prox;
  const double Omega2 = cv.Omega2 > 0 ? cv.Omega2 : pilot.Omega2;
  fmt::print("f* = {}  R_prox = {}  Omega2 = {}  L_hat = {}\n", format_number(ref.f_star),
             format_number(R), format_number(Omega2), format_number(pilot.L_hat));
  for (const auto& name : cv.topologies) {
    const Topology t = make_topology(name, ds.n);
    const double lambda = spectral_info(t).lambda;
    const double delta = resolution(QuantizerSpec{cv.rate_bits, cv.U});
    fmt::print("{}: lambda = {:.6g}, edges = {}\n", name, lambda, t.num_edges());
    for (const auto& s : cv.series) {
      if (s.variant != Variant::DiffEx) continue;
      const ScheduleSet sched = make_schedules(s.gamma, cv.c0, cv.c1, R, Omega2, delta, cv.sigma2, ds.d, lambda);
      fmt::print("  gamma {}: xi = {:.6g}, averaged-gap bound at K={}: {:.6g}, power bound {:.6g}\n",
                 s.gamma, sched.xi, cv.horizon, theorem1_bound(sched, ds.n, cv.horizon, lambda),
                 power_bound(ds.n, ds.d, cv.c1, cv.U, sched.tau, cv.horizon));
    }
    for (double U : sw.U_values) {
      const double d = resolution(QuantizerSpec{sw.rate_bits, U});
      fmt::print("  U = {}: success lower bound {:.6g}\n", U,
                 theorem2_bound(sw.c0, sw.c1, sw.gamma, d, sw.sigma2, Omega2, U, pilot.L_hat,
                                sw.horizon, ds.d, t.num_edges()));
    }
  }
  return 0;
}

void add_common(CLI::App* sub, Common& o) {
  sub->add_option("--config", o.config, "YAML config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "Master seed (overrides the config)");
  sub->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized lazy mirror descent over noisy, rate-limited links"};
  app.require_subcommand(1);
  Common o;
  std::optional<std::string> variant;
  std::optional<std::size_t> trials, reps;

  auto* conv = app.add_subcommand("convergence", "Gap curves for each series and topology");
  add_common(conv, o);
  conv->add_option("--out", o.out, "Output directory");
  conv->add_option("--variant", variant, "Keep only series of this variant (diffex, naive, noiseless)");
  conv->add_option("--replications", reps, "Replications per series");

  auto* sweep = app.add_subcommand("saturation-sweep", "Success probability against the dynamic range");
  add_common(sweep, o);
  sweep->add_option("--out", o.out, "Output directory");
  sweep->add_option("--trials", trials, "Trials per point");

  auto* noise = app.add_subcommand("noise-accumulation", "Decoded-noise variance on isolated links");
  add_common(noise, o);
  noise->add_option("--out", o.out, "Output directory");

  auto* bounds = app.add_subcommand("bounds", "Print the closed-form bounds for a config");
  add_common(bounds, o);

  CLI11_PARSE(app, argc, argv);
  try {
    if (conv->parsed()) return cmd_convergence(o, variant, reps);
    if (sweep->parsed()) return cmd_sweep(o, trials);
    if (noise->parsed()) return cmd_noise(o);
    if (bounds->parsed()) return cmd_bounds(o);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
