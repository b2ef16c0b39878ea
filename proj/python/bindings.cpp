#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dlmd/dlmd.hpp"

namespace py = pybind11;
using namespace dlmd;

namespace {

py::dict metrics_to_dict(const IterationMetrics& m) {
  py::dict d;
  d["k"] = m.k;
  d["gap_avg"] = m.gap_avg;
  d["gap_node_max"] = m.gap_node_max;
  d["avg_iterate_gap"] = m.avg_iterate_gap;
  d["consensus_err_max"] = m.consensus_err_max;
  d["power_avg"] = m.power_avg;
  d["power_max"] = m.power_max;
  d["alpha"] = m.alpha;
  d["beta"] = m.beta;
  d["eta"] = m.eta;
  d["max_omega_inf"] = m.max_omega_inf;
  return d;
}

// Column-oriented view of a run's trajectory.
py::dict trajectory(const RunRecord& r) {
  std::vector<double> k, gap, gap_max, avg_gap, cons, pavg, pmax;
  for (const auto& m : r.iterations) {
    k.push_back(static_cast<double>(m.k));
    gap.push_back(m.gap_avg);
    gap_max.push_back(m.gap_node_max);
    avg_gap.push_back(m.avg_iterate_gap);
    cons.push_back(m.consensus_err_max);
    pavg.push_back(m.power_avg);
    pmax.push_back(m.power_max);
  }
  py::dict d;
  d["k"] = k;
  d["gap_avg"] = gap;
  d["gap_node_max"] = gap_max;
  d["avg_iterate_gap"] = avg_gap;
  d["consensus_err_max"] = cons;
  d["power_avg"] = pavg;
  d["power_max"] = pmax;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Decentralized lazy mirror descent with differential exchange over noisy links";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::invalid_argument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  // topology
  py::class_<SpectralInfo>(m, "SpectralInfo")
      .def_readonly("lambda2", &SpectralInfo::lambda2)
      .def_readonly("lambdaN", &SpectralInfo::lambdaN)
      .def_readonly("lam", &SpectralInfo::lambda);

  py::class_<Topology>(m, "Topology")
      .def_static("from_matrix", &Topology::from_matrix, py::arg("weights"), py::arg("name") = "custom")
      .def_property_readonly("size", &Topology::size)
      .def_property_readonly("weights", &Topology::weights)
      .def_property_readonly("edges", &Topology::edges)
      .def_property_readonly("num_edges", &Topology::num_edges)
      .def_property_readonly("name", &Topology::name)
      .def("neighbors", &Topology::neighbors)
      .def("is_connected", &Topology::is_connected)
      .def("__repr__", [](const Topology& t) {
        return "<Topology " + t.name() + " n=" + std::to_string(t.size()) + ">";
      });

  m.def("make_fully_connected", &make_fully_connected, py::arg("n"));
  m.def("make_ring", &make_ring, py::arg("n"));
  m.def("make_topology", &make_topology, py::arg("name"), py::arg("n"));
  m.def("spectral_info", py::overload_cast<const Topology&>(&spectral_info));
  m.def("mixing_matrix", &mixing_matrix, py::arg("topology"), py::arg("beta"));

  // quantizer and channel
  py::class_<QuantizerSpec>(m, "QuantizerSpec")
      .def(py::init([](unsigned rate_bits, double range) { return QuantizerSpec{rate_bits, range}; }),
           py::arg("rate_bits") = 6, py::arg("range") = 100.0)
      .def_readwrite("rate_bits", &QuantizerSpec::rate_bits)
      .def_readwrite("range", &QuantizerSpec::range)
      .def_static("infinite_rate", &QuantizerSpec::infinite_rate)
      .def_property_readonly("resolution", [](const QuantizerSpec& q) { return resolution(q); })
      .def("grid", &QuantizerSpec::grid);

  m.def(
      "quantize",
      [](const QuantizerSpec& q, const Vector& v, std::uint64_t seed) {
        RandomStream rng(seed);
        const QuantizeOutcome out = quantize(q, v, rng);
        return py::make_tuple(out.value, out.saturated);
      },
      py::arg("spec"), py::arg("v"), py::arg("seed") = 0,
      "Stochastic rounding of v onto the grid; returns (value, saturated).");

  py::enum_<NoiseFamily>(m, "NoiseFamily")
      .value("Gaussian", NoiseFamily::Gaussian)
      .value("Uniform", NoiseFamily::Uniform)
      .value("Laplace", NoiseFamily::Laplace);

  py::class_<ChannelSpec>(m, "ChannelSpec")
      .def(py::init([](double sigma2, NoiseFamily f) { return ChannelSpec{sigma2, f}; }),
           py::arg("sigma2") = 0.0, py::arg("family") = NoiseFamily::Gaussian)
      .def_readwrite("sigma2", &ChannelSpec::sigma2)
      .def_readwrite("family", &ChannelSpec::family);

  // schedules
  py::class_<ScheduleSet>(m, "ScheduleSet")
      .def_readonly("gamma", &ScheduleSet::gamma)
      .def_readonly("tau", &ScheduleSet::tau)
      .def_readonly("c0", &ScheduleSet::c0)
      .def_readonly("c1", &ScheduleSet::c1)
      .def_readonly("xi", &ScheduleSet::xi)
      .def("alpha", &ScheduleSet::alpha)
      .def("beta", &ScheduleSet::beta)
      .def("eta", &ScheduleSet::eta);

  py::class_<BaselineSchedule>(m, "BaselineSchedule")
      .def(py::init([](double eta0) { return BaselineSchedule{eta0}; }), py::arg("eta0"))
      .def_readwrite("eta0", &BaselineSchedule::eta0)
      .def("alpha", &BaselineSchedule::alpha)
      .def("beta", &BaselineSchedule::beta)
      .def("eta", &BaselineSchedule::eta);

  m.def("make_schedules", &make_schedules, py::arg("gamma"), py::arg("c0"), py::arg("c1"),
        py::arg("R_prox"), py::arg("Omega2"), py::arg("Delta"), py::arg("sigma2"), py::arg("d"),
        py::arg("lam"));
  m.def("check_noise_condition", &check_noise_condition, py::arg("alpha"), py::arg("beta"), py::arg("K"));

  // problem
  py::class_<SvmDataOptions>(m, "SvmDataOptions")
      .def(py::init<>())
      .def_readwrite("n", &SvmDataOptions::n)
      .def_readwrite("m", &SvmDataOptions::m)
      .def_readwrite("d", &SvmDataOptions::d)
      .def_readwrite("class_mean_scale", &SvmDataOptions::class_mean_scale)
      .def_readwrite("class_std", &SvmDataOptions::class_std)
      .def_readwrite("polarized", &SvmDataOptions::polarized)
      .def_readwrite("mu", &SvmDataOptions::mu)
      .def_readwrite("seed", &SvmDataOptions::seed);

  py::class_<SvmDataset>(m, "SvmDataset")
      .def_readonly("n", &SvmDataset::n)
      .def_readonly("m", &SvmDataset::m)
      .def_readonly("d", &SvmDataset::d)
      .def_readonly("mu", &SvmDataset::mu)
      .def_readonly("features", &SvmDataset::features)
      .def_readonly("labels", &SvmDataset::labels);

  m.def("generate_svm_data", &generate_svm_data, py::arg("options") = SvmDataOptions{});
  m.def("make_svm_dataset", &make_svm_dataset, py::arg("features"), py::arg("labels"), py::arg("mu"));

  py::class_<GlobalObjective>(m, "GlobalObjective")
      .def(py::init<const SvmDataset&>(), py::keep_alive<1, 2>())
      .def("value", &GlobalObjective::value)
      .def("subgradient", &GlobalObjective::subgradient)
      .def_property_readonly("num_nodes", &GlobalObjective::num_nodes)
      .def_property_readonly("dim", &GlobalObjective::dim);

  py::enum_<ProxKind>(m, "ProxKind")
      .value("Quadratic", ProxKind::Quadratic)
      .value("Entropy", ProxKind::Entropy)
      .value("AnchoredQuadratic", ProxKind::AnchoredQuadratic);

  py::class_<ProximalMap>(m, "ProximalMap")
      .def(py::init<ProxKind, Vector>(), py::arg("kind") = ProxKind::Quadratic, py::arg("x_init") = Vector())
      .def("project", &ProximalMap::project)
      .def("psi", &ProximalMap::psi);

  // engine
  py::enum_<Variant>(m, "Variant")
      .value("DiffEx", Variant::DiffEx)
      .value("NaiveDlmd", Variant::NaiveDlmd)
      .value("NoiselessBaseline", Variant::NoiselessBaseline);

  py::enum_<RunStatus>(m, "RunStatus").value("Ok", RunStatus::Ok).value("Failure", RunStatus::Failure);

  py::class_<EngineConfig>(m, "EngineConfig")
      .def(py::init<>())
      .def_readwrite("topology", &EngineConfig::topology)
      .def_readwrite("schedule", &EngineConfig::schedule)
      .def_readwrite("quantizer", &EngineConfig::quantizer)
      .def_readwrite("channel", &EngineConfig::channel)
      .def_readwrite("prox", &EngineConfig::prox)
      .def_readwrite("batch_size", &EngineConfig::batch_size)
      .def_readwrite("horizon", &EngineConfig::horizon)
      .def_readwrite("seed", &EngineConfig::seed)
      .def_readwrite("variant", &EngineConfig::variant)
      .def_readwrite("warm_restart", &EngineConfig::warm_restart);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("status", &RunRecord::status)
      .def_readonly("k_reached", &RunRecord::k_reached)
      .def_readonly("failed_at", &RunRecord::failed_at)
      .def_readonly("failing_link", &RunRecord::failing_link)
      .def_readonly("restarts", &RunRecord::restarts)
      .def_readonly("lipschitz_hat", &RunRecord::lipschitz_hat)
      .def_readonly("omega2_hat", &RunRecord::omega2_hat)
      .def_readonly("seed", &RunRecord::seed)
      .def("succeeded", &RunRecord::succeeded)
      .def("metrics", [](const RunRecord& r) {
        py::list out;
        for (const auto& it : r.iterations) out.append(metrics_to_dict(it));
        return out;
      })
      .def("trajectory", &trajectory);

  m.def(
      "run",
      [](const EngineConfig& c, const GlobalObjective& f, double f_star) {
        py::gil_scoped_release release;
        return run(c, f, f_star);
      },
      py::arg("config"), py::arg("objective"), py::arg("f_star") = 0.0);

  // harness
  py::class_<ReferenceSolution>(m, "ReferenceSolution")
      .def_readonly("x_star", &ReferenceSolution::x_star)
      .def_readonly("f_star", &ReferenceSolution::f_star)
      .def_readonly("certificate", &ReferenceSolution::certificate)
      .def_readonly("converged", &ReferenceSolution::converged);

  m.def("solve_reference", &solve_reference, py::arg("data"), py::arg("tol") = 1e-7,
        py::arg("max_epochs") = 1000000);
  m.def("theorem1_bound", &theorem1_bound, py::arg("schedules"), py::arg("n"), py::arg("K"), py::arg("lam"));
  m.def("theorem2_bound", &theorem2_bound, py::arg("c0"), py::arg("c1"), py::arg("gamma"),
        py::arg("Delta"), py::arg("sigma2"), py::arg("Omega2"), py::arg("U"), py::arg("L_hat"),
        py::arg("K"), py::arg("d"), py::arg("num_edges"));
  m.def("power_bound", &power_bound, py::arg("n"), py::arg("d"), py::arg("c1"), py::arg("U"),
        py::arg("tau"), py::arg("K"));
  m.def("wilson_interval", &wilson_interval, py::arg("successes"), py::arg("trials"));

  py::class_<SuccessEstimate>(m, "SuccessEstimate")
      .def_readonly("trials", &SuccessEstimate::trials)
      .def_readonly("successes", &SuccessEstimate::successes)
      .def_readonly("p_hat", &SuccessEstimate::p_hat)
      .def_readonly("wilson_lo", &SuccessEstimate::wilson_lo)
      .def_readonly("wilson_hi", &SuccessEstimate::wilson_hi)
      .def_readonly("bound", &SuccessEstimate::bound);

  m.def(
      "estimate_success_probability",
      [](const EngineConfig& c, const GlobalObjective& f, std::size_t trials, std::uint64_t seed,
         unsigned threads) {
        py::gil_scoped_release release;
        return estimate_success_probability(c, f, trials, seed, 0.0, threads);
      },
      py::arg("config"), py::arg("objective"), py::arg("trials"), py::arg("seed"), py::arg("threads") = 0);

  py::class_<ConvergenceSettings>(m, "ConvergenceSettings")
      .def(py::init<>())
      .def_readwrite("experiment_id", &ConvergenceSettings::experiment_id)
      .def_readwrite("data", &ConvergenceSettings::data)
      .def_readwrite("topologies", &ConvergenceSettings::topologies)
      .def_readwrite("rate_bits", &ConvergenceSettings::rate_bits)
      .def_readwrite("U", &ConvergenceSettings::U)
      .def_readwrite("sigma2", &ConvergenceSettings::sigma2)
      .def_readwrite("horizon", &ConvergenceSettings::horizon)
      .def_readwrite("replications", &ConvergenceSettings::replications)
      .def_readwrite("seed", &ConvergenceSettings::seed)
      .def_readwrite("threads", &ConvergenceSettings::threads);

  m.def(
      "run_convergence",
      [](const ConvergenceSettings& st) {
        ConvergenceResult r;
        {
          py::gil_scoped_release release;
          r = run_convergence(st);
        }
        py::dict curves;
        for (const auto& s : r.series) curves[py::str(s.topology + "/" + s.spec.name)] = s.mean_gap_avg;
        py::dict out;
        out["f_star"] = r.reference.f_star;
        out["R_prox"] = r.R_prox;
        out["Omega2"] = r.Omega2;
        out["mean_gap_avg"] = curves;
        return out;
      },
      py::arg("settings"), "Runs every series and returns mean gap curves keyed 'topology/series'.");

  py::class_<SweepSettings>(m, "SweepSettings")
      .def(py::init<>())
      .def_readwrite("experiment_id", &SweepSettings::experiment_id)
      .def_readwrite("data", &SweepSettings::data)
      .def_readwrite("topologies", &SweepSettings::topologies)
      .def_readwrite("U_values", &SweepSettings::U_values)
      .def_readwrite("rate_bits", &SweepSettings::rate_bits)
      .def_readwrite("sigma2", &SweepSettings::sigma2)
      .def_readwrite("gamma", &SweepSettings::gamma)
      .def_readwrite("horizon", &SweepSettings::horizon)
      .def_readwrite("trials", &SweepSettings::trials)
      .def_readwrite("seed", &SweepSettings::seed)
      .def_readwrite("threads", &SweepSettings::threads);

  m.def(
      "run_saturation_sweep",
      [](SweepSettings st) {
        st.keep_records = false;
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = run_saturation_sweep(st);
        }
        py::list rows;
        for (const auto& p : r.points) {
          py::dict d;
          d["topology"] = p.topology;
          d["U"] = p.U;
          d["p_hat"] = p.estimate.p_hat;
          d["wilson_lo"] = p.estimate.wilson_lo;
          d["wilson_hi"] = p.estimate.wilson_hi;
          d["bound"] = p.estimate.bound;
          rows.append(d);
        }
        return rows;
      },
      py::arg("settings"));
}
