#include <doctest.h>

#include <cmath>

#include "dlmd/engine.hpp"
#include "dlmd/harness.hpp"

using namespace dlmd;

namespace {

SvmDataset data(std::size_t n, std::uint64_t seed = 3) {
  SvmDataOptions o;
  o.n = n;
  o.m = 10;
  o.d = 30;
  o.seed = seed;
  return generate_svm_data(o);
}

EngineConfig base_config(const Topology& t, Variant v = Variant::DiffEx) {
  EngineConfig c;
  c.topology = t;
  c.variant = v;
  c.schedule = make_schedules(0.5, 1.0, 1.0, 0.9, 8.0, 0.0, 0.1, 30, spectral_info(t).lambda);
  c.quantizer = QuantizerSpec{6, 100.0};
  c.channel = ChannelSpec{0.1};
  c.horizon = 50;
  c.seed = 17;
  return c;
}

// Plain consensus-plus-subgradient recursion with exact communication:
// z_i <- sum_j W_ij(k) z_j + g_i(x_i), x_i = -eta(k) z_i.
std::vector<std::vector<Vector>> reference_trajectory(const GlobalObjective& f, const Topology& t,
                                                      const Schedule& s, bool unit_weights,
                                                      std::size_t K) {
  const std::size_t n = t.size();
  std::vector<Vector> z(n, Vector::Zero(30)), x(n, Vector::Zero(30));
  std::vector<std::vector<Vector>> traj;
  for (std::size_t k = 1; k <= K; ++k) {
    const double b = unit_weights ? 1.0 : beta(s, k);
    const Matrix W = mixing_matrix(t, b);
    std::vector<Vector> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = f.local(i).subgradient(x[i]);
      for (std::size_t j = 0; j < n; ++j) next[i] += W(i, j) * z[j];
    }
    z = next;
    for (std::size_t i = 0; i < n; ++i) x[i] = -eta(s, k) * z[i];
    traj.push_back(x);
  }
  return traj;
}

}  // namespace

TEST_CASE("unit weights without noise reproduce plain consensus up to quantization") {
  const SvmDataset ds = data(6);
  const GlobalObjective f(ds);
  const Topology t = make_ring(6);
  EngineConfig c = base_config(t);
  c.schedule = BaselineSchedule{0.05};
  c.channel.sigma2 = 0.0;
  c.quantizer = QuantizerSpec{40, 50.0};
  Simulation sim(c, f);
  const auto ref = reference_trajectory(f, t, c.schedule, true, 100);
  double worst = 0.0;
  for (std::size_t k = 1; k <= 100; ++k) {
    REQUIRE(sim.step().status == RunStatus::Ok);
    for (std::size_t i = 0; i < 6; ++i) worst = std::max(worst, (sim.primal(i) - ref[k - 1][i]).norm());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("noise-free infinite-rate diffex equals consensus with W(k)") {
  const SvmDataset ds = data(10);
  const GlobalObjective f(ds);
  for (const Topology& t : {make_ring(10), make_fully_connected(10)}) {
    EngineConfig c = base_config(t);
    c.channel.sigma2 = 0.0;
    c.quantizer = QuantizerSpec::infinite_rate();
    Simulation sim(c, f);
    const auto ref = reference_trajectory(f, t, c.schedule, false, 200);
    double worst = 0.0;
    for (std::size_t k = 1; k <= 200; ++k) {
      REQUIRE(sim.step().status == RunStatus::Ok);
      for (std::size_t i = 0; i < 10; ++i)
        worst = std::max(worst, (sim.primal(i) - ref[k - 1][i]).cwiseAbs().maxCoeff());
      for (std::size_t l = 0; l < sim.num_links(); ++l)
        CHECK((sim.estimate(l) - sim.proxy(l)).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("first round: zero differential rounds to the two middle levels") {
  const SvmDataset ds = data(2);
  const GlobalObjective f(ds);
  EngineConfig c = base_config(make_fully_connected(2));
  c.track_noise = true;
  Simulation sim(c, f);
  REQUIRE(sim.step().status == RunStatus::Ok);
  CHECK(sim.num_links() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    // Zero sits halfway between the two central levels of an even grid.
    const double half = resolution(c.quantizer) / 2.0;
    CHECK((sim.proxy(l).cwiseAbs().array() - half).abs().maxCoeff() < 1e-12);
    CHECK((sim.estimate(l) - sim.proxy(l) - sim.noise_sum(l)).norm() < 1e-12);
    CHECK(sim.noise_sum(l).norm() > 0.0);
  }
  // Node 0 update: W_00 * 0 + W_01 * estimate + g_0(0).
  const double b = beta(c.schedule, 1);
  const Vector expected = b * 0.5 * sim.estimate(sim.link_index(0, 1)) + f.local(0).subgradient(Vector::Zero(30));
  CHECK((sim.dual(0) - expected).norm() < 1e-14);
}

TEST_CASE("proxy and estimate differ by the accumulated decoded noise") {
  const SvmDataset ds = data(10);
  const GlobalObjective f(ds);
  for (Variant v : {Variant::DiffEx, Variant::NaiveDlmd}) {
    EngineConfig c = base_config(make_ring(10), v);
    if (v == Variant::NaiveDlmd)
      c.schedule = BaselineSchedule{0.02};
    else
      c.schedule = make_schedules(0.1, 1, 1, 0.9, 8, 3.17, 0.1, 30, 0.87);
    c.track_noise = true;
    Simulation sim(c, f);
    for (int k = 0; k < 300; ++k) {
      REQUIRE(sim.step().status == RunStatus::Ok);
      for (std::size_t l = 0; l < sim.num_links(); ++l) {
        const Vector lhs = sim.proxy(l) - sim.estimate(l);
        const Vector rhs = -sim.noise_sum(l);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + rhs.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST_CASE("node average moves by the mean effective subgradient") {
  const SvmDataset ds = data(10);
  const GlobalObjective f(ds);
  EngineConfig c = base_config(make_ring(10));
  c.schedule = make_schedules(0.3, 1, 1, 0.9, 8, 3.17, 0.1, 30, 0.87);
  Simulation sim(c, f);
  for (int step = 0; step < 100; ++step) {
    const std::size_t k = sim.iteration();
    std::vector<Vector> z_before, x_before;
    for (std::size_t i = 0; i < 10; ++i) {
      z_before.push_back(sim.dual(i));
      x_before.push_back(sim.primal(i));
    }
    Vector mean_before = Vector::Zero(30);
    for (const auto& z : z_before) mean_before += z / 10.0;
    REQUIRE(sim.step().status == RunStatus::Ok);
    // Column sums of W are one, so only g_i + sum_j W_ij (estimate_ij - z_j) moves the mean.
    const double b = beta(c.schedule, k);
    Vector shift = Vector::Zero(30);
    for (std::size_t i = 0; i < 10; ++i) {
      shift += f.local(i).subgradient(x_before[i]);
      for (std::size_t j : c.topology.neighbors(i))
        shift += b * c.topology.weight(i, j) * (sim.estimate(sim.link_index(i, j)) - z_before[j]);
    }
    CHECK((sim.dual_mean() - (mean_before + shift / 10.0)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("running average is accumulated exactly") {
  const SvmDataset ds = data(4);
  const GlobalObjective f(ds);
  EngineConfig c = base_config(make_ring(4));
  Simulation sim(c, f);
  std::vector<Vector> sum(4, Vector::Zero(30));
  for (std::size_t k = 1; k <= 40; ++k) {
    for (std::size_t i = 0; i < 4; ++i) sum[i] += sim.primal(i);
    REQUIRE(sim.step().status == RunStatus::Ok);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK((sim.primal_average(i) - sum[i] / static_cast<double>(k)).norm() < 1e-14);
  }
}

TEST_CASE("single node reduces to centralized lazy mirror descent") {
  SvmDataOptions o;
  o.n = 1;
  o.m = 40;
  o.d = 30;
  o.polarized = false;
  const SvmDataset ds = generate_svm_data(o);
  const GlobalObjective f(ds);
  const ReferenceSolution ref = solve_reference(ds);
  EngineConfig c;
  c.topology = Topology::from_matrix(Matrix::Identity(1, 1));
  c.schedule = BaselineSchedule{0.3};
  c.horizon = 2000;
  const RunRecord r = run(c, f, ref.f_star);
  REQUIRE(r.status == RunStatus::Ok);
  CHECK(r.iterations.back().avg_iterate_gap < 0.5 * r.iterations[9].avg_iterate_gap);
  CHECK(r.iterations.back().avg_iterate_gap >= -1e-9);
  CHECK(r.iterations.back().consensus_err_max == 0.0);
}

TEST_CASE("identical seeds give identical records") {
  const SvmDataset ds = data(10);
  const GlobalObjective f(ds);
  EngineConfig c = base_config(make_ring(10));
  const RunRecord a = run(c, f, 0.1), b = run(c, f, 0.1);
  REQUIRE(a.iterations.size() == b.iterations.size());
  for (std::size_t k = 0; k < a.iterations.size(); ++k) {
    CHECK(a.iterations[k].gap_avg == b.iterations[k].gap_avg);
    CHECK(a.iterations[k].consensus_err_max == b.iterations[k].consensus_err_max);
    CHECK(a.iterations[k].power_avg == b.iterations[k].power_avg);
  }
  c.seed = 18;
  const RunRecord other = run(c, f, 0.1);
  CHECK(other.iterations.back().gap_avg != a.iterations.back().gap_avg);
}

TEST_CASE("saturation stops the run at the first offending link") {
  const SvmDataset ds = data(4);
  const GlobalObjective f(ds);
  EngineConfig c = base_config(make_fully_connected(4));
  c.quantizer = QuantizerSpec{3, 1e-6};
  c.horizon = 10;
  Simulation sim(c, f);
  CHECK(sim.step().status == RunStatus::Ok);  // all states are still zero
  const StepOutcome out = sim.step();
  CHECK(out.status == RunStatus::Failure);
  CHECK(out.k == 2);
  REQUIRE(out.failing_link.has_value());
  CHECK(out.failing_link->first == 0);
  CHECK(out.failing_link->second == 1);

  const RunRecord r = run(c, f, 0.0);
  CHECK(r.status == RunStatus::Failure);
  CHECK(r.failed_at == 2);
  CHECK(r.k_reached == 1);
  CHECK(r.iterations.size() == 1);
  CHECK_FALSE(r.succeeded());
}

TEST_CASE("warm restart continues but does not count as success") {
  const SvmDataset ds = data(4);
  const GlobalObjective f(ds);
  EngineConfig c = base_config(make_fully_connected(4));
  c.quantizer = QuantizerSpec{3, 1.0};
  c.horizon = 60;
  c.warm_restart = true;
  const RunRecord r = run(c, f, 0.0);
  CHECK(r.status == RunStatus::Ok);
  CHECK(r.k_reached == 60);
  CHECK(r.restarts > 0);
  CHECK_FALSE(r.succeeded());
}

TEST_CASE("entropy prox keeps every iterate on the simplex") {
  const SvmDataset ds = data(5);
  const GlobalObjective f(ds);
  EngineConfig c = base_config(make_ring(5));
  c.prox = ProximalMap(ProxKind::Entropy);
  c.quantizer = QuantizerSpec::infinite_rate();
  Simulation sim(c, f);
  for (int k = 0; k < 100; ++k) {
    REQUIRE(sim.step().status == RunStatus::Ok);
    for (std::size_t i = 0; i < 5; ++i) CHECK(c.prox.feasible(sim.primal(i)));
  }
}

TEST_CASE("transmit power stays under the deterministic bound") {
  const SvmDataset ds = data(10);
  const GlobalObjective f(ds);
  for (double gamma : {0.1, 0.5}) {
    EngineConfig c = base_config(make_fully_connected(10));
    c.quantizer = QuantizerSpec{3, 2.0};
    c.schedule = make_schedules(gamma, 1, 1, 0.9, 8, c.quantizer.resolution(), 0.1, 30, 0.0);
    c.horizon = 200;
    c.warm_restart = false;
    const RunRecord r = run(c, f, 0.0);
    const double tau = 1.0 - 2.0 * gamma;
    // Each of the 9 outgoing signals per round has |s|^2 <= d U^2 alpha(k)^2.
    double alpha_sq_sum = 0.0;
    for (const auto& m : r.iterations) {
      alpha_sq_sum += std::pow(static_cast<double>(m.k), tau);
      const double exact = 9.0 * 30.0 * 4.0 * alpha_sq_sum / static_cast<double>(m.k);
      CHECK(m.power_max <= exact * (1.0 + 1e-12));
      CHECK(m.power_avg <= m.power_max);
      if (m.k >= 9) CHECK(m.power_max <= power_bound(10, 30, 1.0, 2.0, tau, m.k));
    }
  }
}

TEST_CASE("disconnected nodes optimize locally and stay away from the optimum") {
  const SvmDataset ds = data(4);
  const GlobalObjective f(ds);
  const ReferenceSolution ref = solve_reference(ds);
  EngineConfig c;
  c.topology = Topology::from_matrix(Matrix::Identity(4, 4));
  c.variant = Variant::NoiselessBaseline;
  c.schedule = BaselineSchedule{0.2};
  c.horizon = 2000;
  const RunRecord alone = run(c, f, ref.f_star);
  c.topology = make_fully_connected(4);
  const RunRecord together = run(c, f, ref.f_star);
  CHECK(alone.iterations.back().gap_avg > 0.1);
  CHECK(together.iterations.back().gap_avg < 0.5 * alone.iterations.back().gap_avg);
}

TEST_CASE("uncompensated differential exchange accumulates noise linearly") {
  const SvmDataset ds = data(10);
  const GlobalObjective f(ds);
  EngineConfig c = base_config(make_fully_connected(10), Variant::NaiveDlmd);
  c.schedule = BaselineSchedule{0.01};
  c.track_noise = true;
  Simulation sim(c, f);
  auto mean_square = [&] {
    double s = 0.0;
    for (std::size_t l = 0; l < sim.num_links(); ++l) s += sim.noise_sum(l).squaredNorm();
    return s / static_cast<double>(sim.num_links() * 30);
  };
  for (int k = 0; k < 100; ++k) REQUIRE(sim.step().status == RunStatus::Ok);
  const double v100 = mean_square();
  for (int k = 100; k < 400; ++k) REQUIRE(sim.step().status == RunStatus::Ok);
  const double v400 = mean_square();
  CHECK(v100 == doctest::Approx(0.1 * 100).epsilon(0.1));
  CHECK(v400 / v100 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("direct exchange sends quantized states every round") {
  const SvmDataset ds = data(4);
  const GlobalObjective f(ds);
  EngineConfig c = base_config(make_fully_connected(4), Variant::NaiveDlmd);
  c.schedule = BaselineSchedule{0.05};
  c.exchange = Exchange::Direct;
  c.channel.sigma2 = 0.0;
  c.quantizer = QuantizerSpec::infinite_rate();
  Simulation sim(c, f);
  for (int k = 0; k < 5; ++k) {
    std::vector<Vector> z;
    for (std::size_t i = 0; i < 4; ++i) z.push_back(sim.dual(i));
    REQUIRE(sim.step().status == RunStatus::Ok);
    for (std::size_t l = 0; l < sim.num_links(); ++l)
      CHECK(sim.estimate(l) == z[sim.link_endpoints(l).second]);
  }
  EngineConfig bad = base_config(make_fully_connected(4));
  bad.exchange = Exchange::Direct;
  CHECK_THROWS_AS(Simulation(bad, f), std::invalid_argument);
}

TEST_CASE("variant names") {
  for (const char* v : {"diffex", "naive_dlmd", "noiseless_baseline"})
    CHECK(to_string(parse_variant(v)) == v);
  CHECK_THROWS_AS(parse_variant("other"), std::invalid_argument);
}
