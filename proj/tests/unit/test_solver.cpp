#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include <coupled/chebyshev.hpp>
#include <coupled/errors.hpp>
#include <coupled/lower_bound.hpp>
#include <coupled/oracle.hpp>
#include <coupled/solver.hpp>

using namespace coupled;

namespace {

DerivedConstants unit_constants() {
  ConstraintSpectrum cs;
  cs.L_A = cs.mu_A = 1.0;
  return derived_constants(1.0, 1.0, cs);
}

struct Fixture {
  ProblemInstance inst;
  GossipMatrix gm;
  DerivedConstants dc;
  SolverParams params;
};

Fixture make_fixture(ProblemInstance inst, SolverLimits limits = {}) {
  GossipMatrix gm = laplacian_gossip(inst.graph());
  const DerivedConstants dc = derived_constants(inst);
  SolverParams p = theorem1_params(inst.L_f(), inst.mu_f(), limits, dc);
  return {std::move(inst), std::move(gm), dc, p};
}

}  // namespace

TEST(DefaultParams, UnitConditionNumber) {
  const SolverParams p = theorem1_params(1.0, 1.0, {}, unit_constants());
  EXPECT_NEAR(p.tau, 0.0994778032192777, 1e-15);
  EXPECT_NEAR(p.eta, 0.314140431218772, 1e-14);
  EXPECT_NEAR(p.theta, 2.51312344975017, 1e-13);
  EXPECT_DOUBLE_EQ(p.alpha, 0.25);
  EXPECT_DOUBLE_EQ(p.r, 0.5);
  EXPECT_NEAR(p.gamma * p.gamma, 450.0 / 121.0, 1e-14);
}

TEST(DefaultParams, TauDecaysLikeInverseSqrtKappa) {
  const DerivedConstants dc = unit_constants();
  double prev = 1.0;
  for (double kf : {1e2, 1e4, 1e6, 1e8}) {
    const double tau = theorem1_params(kf, 1.0, {}, dc).tau;
    EXPECT_LT(tau, prev);
    EXPECT_NEAR(tau * std::sqrt(kf), 0.5 * std::sqrt(19.0 / 60.0), 1e-2);
    prev = tau;
  }
}

TEST(DefaultParams, AlphaIndependentOfConstraints) {
  for (double la : {1.0, 10.0, 1e3}) {
    ConstraintSpectrum cs;
    cs.L_A = la;
    cs.mu_A = 1.0;
    EXPECT_DOUBLE_EQ(theorem1_params(7.0, 2.0, {}, derived_constants(7.0, 2.0, cs)).alpha, 0.5);
  }
  EXPECT_THROW(theorem1_params(1.0, 2.0, {}, unit_constants()), InvalidParam);
}

TEST(SpectralParams, Formulas) {
  const DerivedConstants dc = unit_constants();
  const SolverParams p = proposition1_params({}, dc);
  EXPECT_NEAR(p.tau, std::min(1.0, 0.5 * std::sqrt(dc.kappa_K / dc.kappa_G_bound)), 1e-15);
  EXPECT_NEAR(p.eta, 1.0 / (4.0 * p.tau * dc.L_G), 1e-15);
  EXPECT_NEAR(p.theta, 1.0 / (p.eta * dc.L_K), 1e-13);
  EXPECT_DOUBLE_EQ(p.alpha, dc.mu_G);
}

TEST(GradG, FeasiblePointGivesObjectiveGradient) {
  const Graph g = make_graph(Topology::path, 2);
  Fixture s = make_fixture(gen_resource_allocation(2, 1, {Vector::Ones(1), Vector::Zero(1)},
                                          Vector::Ones(1), g));
  SimNet net(g, s.gm);
  // x = b split, y = 0: A x - b = 0
  LiftedVector u{(Vector(2) << 0.5, 0.5).finished(), Matrix::Zero(1, 2)};
  const LiftedVector gr = grad_G(u, s.inst, s.params, net);
  EXPECT_NEAR(gr.x[0], -0.5, 1e-14);
  EXPECT_NEAR(gr.x[1], 0.5, 1e-14);
  EXPECT_LE(gr.y.norm(), 1e-14);
  const Counters c = net.counters();
  EXPECT_EQ(c.grad_calls, 1u);
  EXPECT_EQ(c.matmul_rounds, 2u);
  EXPECT_EQ(c.comm_rounds, static_cast<std::uint64_t>(2 * wprime_schedule(s.gm).degree));
}

TEST(GradG, ZeroPointZeroRhs) {
  const Graph g = make_graph(Topology::ring, 3);
  Fixture s = make_fixture(gen_resource_allocation(3, 2, {Vector::Ones(2), Vector::Zero(2), -Vector::Ones(2)},
                                          Vector::Zero(2), g));
  SimNet net(g, s.gm);
  const LiftedVector gr = grad_G(LiftedVector::zeros(6, 2, 3), s.inst, s.params, net);
  EXPECT_LE((gr.x - net.gradient(s.inst, Vector::Zero(6))).norm(), 1e-14);
  EXPECT_EQ(gr.y.norm(), 0.0);
}

TEST(GradG, FiniteDifferenceOracle) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Graph g = make_graph(Topology::erdos_renyi, 5, 0.5, seed);
    Fixture s = make_fixture(gen_synthetic_regression(5, 2, 3, 0.1, g, seed));
    SimNet net(g, s.gm);
    const Matrix Wp = dense_wprime(s.gm);
    const Eigen::Index dim = s.inst.total_dim() + 15;
    for (int t = 0; t < 5; ++t) {
      Vector v(dim);
      for (Eigen::Index k = 0; k < dim; ++k) v[k] = normal(rng);
      auto lift = [&](const Vector& w) {
        return LiftedVector{w.head(s.inst.total_dim()),
                            Matrix(Eigen::Map<const Matrix>(w.data() + s.inst.total_dim(), 3, 5))};
      };
      const Vector got = grad_G(lift(v), s.inst, s.params, net).stacked();
      const Vector fd = finite_diff_grad(
          [&](const Vector& w) { return lifted_objective(s.inst, s.dc, Wp, lift(w)); }, v,
          1e-6 * (1.0 + v.norm()));
      EXPECT_LE((got - fd).norm(), 1e-5 * got.norm());
    }
  }
}

TEST(Solve, ResourceAllocationSymmetricOptimum) {
  const Graph g = make_graph(Topology::path, 2);
  Fixture s = make_fixture(gen_resource_allocation(2, 1, {Vector::Zero(1), Vector::Zero(1)},
                                          Vector::Ones(1), g),
                  {.max_iters = 5000, .tol_x = 1e-12, .tol_feas = 1e-10});
  SimNet net(g, s.gm);
  const SolveResult r = solve(s.inst, s.params, net);
  EXPECT_EQ(r.reason, StopReason::converged);
  EXPECT_NEAR(r.x[0], 0.5, 1e-6);
  EXPECT_NEAR(r.x[1], 0.5, 1e-6);
}

TEST(Solve, CounterAuditAndMonotoneCounters) {
  const Graph g = make_graph(Topology::erdos_renyi, 6, 0.5, 2);
  Fixture s = make_fixture(gen_synthetic_regression(6, 2, 3, 0.1, g, 2), {.max_iters = 150});
  SimNet net(g, s.gm);
  const SolveResult r = solve(s.inst, s.params, net);
  const int nb = b_schedule(s.dc).degree, nw = wprime_schedule(s.gm).degree;
  ASSERT_EQ(r.trace.records.size(), r.iterations + 1);
  for (const auto& rec : r.trace.records)
    EXPECT_EQ(rec.counters, expected_counters(rec.iter, nb, nw)) << "iter " << rec.iter;
  for (std::size_t k = 1; k < r.trace.records.size(); ++k) {
    const auto& a = r.trace.records[k - 1].counters;
    const auto& b = r.trace.records[k].counters;
    EXPECT_LE(a.grad_calls, b.grad_calls);
    EXPECT_LE(a.matmul_rounds, b.matmul_rounds);
    EXPECT_LE(a.comm_rounds, b.comm_rounds);
  }
}

TEST(Solve, MatchesKktOracleAndKeepsInvariant) {
  const Graph g = make_graph(Topology::ring, 5);
  Fixture s = make_fixture(gen_synthetic_regression(5, 3, 4, 0.2, g, 6),
                  {.max_iters = 50000, .tol_x = 1e-13, .tol_feas = 1e-9});
  const ReferenceSolution ref = kkt_oracle(s.inst);
  SimNet net(g, s.gm);
  const SolveResult r = solve(s.inst, s.params, net, ref.x_star);
  EXPECT_EQ(r.reason, StopReason::converged);
  EXPECT_LE((r.x - ref.x_star).norm(), 1e-12 * 1e4 * (1.0 + ref.x_star.norm()));
  EXPECT_LE(r.trace.records.back().feas_residual, 1e-6 * (1.0 + s.inst.b_sum().norm()));
  EXPECT_LE(r.max_block_sum_ratio, kTolBlockSum);
  EXPECT_TRUE(r.trace.has_dist());
}

TEST(Solve, LinearConvergenceTail) {
  const Graph g = make_graph(Topology::ring, 4);
  Fixture s = make_fixture(gen_conditioned_quadratic(4, 3, 20.0, 3.0, g, 1), {.max_iters = 100000});
  s.params.target_rel_err = 1e-8;
  s.params.tol_x = 0.0;
  const ReferenceSolution ref = kkt_oracle(s.inst);
  SimNet net(g, s.gm);
  const SolveResult r = solve(s.inst, s.params, net, ref.x_star);
  ASSERT_EQ(r.reason, StopReason::target_reached);
  const std::size_t half = r.trace.records.size() / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t k = half; k < r.trace.records.size(); ++k, ++cnt) {
    const double x = static_cast<double>(k), y = std::log(*r.trace.records[k].dist_to_opt);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  EXPECT_LT(slope, 0.0);
}

TEST(Solve, DeterministicReplay) {
  const Graph g = make_graph(Topology::erdos_renyi, 6, 0.5, 9);
  Fixture s = make_fixture(gen_synthetic_regression(6, 2, 3, 0.1, g, 9), {.max_iters = 300});
  SimNet n1(g, s.gm), n2(g, s.gm);
  const SolveResult a = solve(s.inst, s.params, n1);
  const SolveResult b = solve(s.inst, s.params, n2);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
    EXPECT_EQ(std::memcmp(&a.trace.records[k].objective, &b.trace.records[k].objective, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&a.trace.records[k].feas_residual, &b.trace.records[k].feas_residual, sizeof(double)), 0);
  }
  EXPECT_EQ(std::memcmp(a.x.data(), b.x.data(), sizeof(double) * a.x.size()), 0);
}

TEST(Solve, OversizedDualStepDiverges) {
  const Graph g = make_graph(Topology::ring, 6);
  Fixture s = make_fixture(gen_synthetic_regression(6, 2, 3, 0.1, g, 4), {.max_iters = 5000});
  s.params.theta *= 10.0;
  SimNet net(g, s.gm);
  EXPECT_THROW(solve(s.inst, s.params, net), NonFiniteIterate);
}

TEST(Solve, RejectsBadParameters) {
  const Graph g = make_graph(Topology::path, 2);
  Fixture s = make_fixture(gen_resource_allocation(2, 1, {Vector::Zero(1), Vector::Zero(1)}, Vector::Ones(1), g));
  SimNet net(g, s.gm);
  SolverParams p = s.params;
  p.tau = 0.0;
  EXPECT_THROW(solve(s.inst, p, net), InvalidParam);
  p = s.params;
  p.eta = -1.0;
  EXPECT_THROW(solve(s.inst, p, net), InvalidParam);
  EXPECT_THROW(solve(s.inst, s.params, net, Vector::Zero(5)), ShapeMismatch);
}

TEST(Solve, WorstCaseInstanceContractsAtPredictedRate) {
  Fixture s = make_fixture(gen_lower_bound_instance(6, 2.0, 1.0, 2.0, 1.0, 8), {.max_iters = 4000});
  s.params.tol_x = 0.0;
  s.params.target_rel_err = 1e-9;
  const ReferenceSolution ref = kkt_oracle(s.inst);
  SimNet net(s.inst.graph(), s.gm);
  const SolveResult r = solve(s.inst, s.params, net, ref.x_star);
  ASSERT_EQ(r.reason, StopReason::target_reached);
  // per-iteration contraction of ||x - x*||^2 over the second half of the run
  const auto& recs = r.trace.records;
  const std::size_t a = recs.size() / 2, b = recs.size() - 1;
  const double ratio = std::pow(*recs[b].dist_to_opt / *recs[a].dist_to_opt, 2.0 / static_cast<double>(b - a));
  EXPECT_LE(ratio, 1.05 * proposition1_rate(s.dc));
}

TEST(TraceCsv, RoundTrip) {
  const Graph g = make_graph(Topology::path, 3);
  Fixture s = make_fixture(gen_synthetic_regression(3, 2, 2, 0.3, g, 1), {.max_iters = 25});
  SimNet net(g, s.gm);
  const ReferenceSolution ref = kkt_oracle(s.inst);
  for (bool with_ref : {false, true}) {
    SimNet n(g, s.gm);
    const SolveResult r = with_ref ? solve(s.inst, s.params, n, ref.x_star) : solve(s.inst, s.params, n);
    std::stringstream ss;
    write_trace_csv(r.trace, ss);
    const std::string header = ss.str().substr(0, ss.str().find('\n'));
    EXPECT_EQ(header.find("dist_to_opt") != std::string::npos, with_ref);
    const ConvergenceTrace back = read_trace_csv(ss);
    ASSERT_EQ(back.records.size(), r.trace.records.size());
    for (std::size_t k = 0; k < back.records.size(); ++k) {
      EXPECT_EQ(back.records[k].iter, r.trace.records[k].iter);
      EXPECT_EQ(back.records[k].counters, r.trace.records[k].counters);
      EXPECT_EQ(back.records[k].objective, r.trace.records[k].objective);
      EXPECT_EQ(back.records[k].feas_residual, r.trace.records[k].feas_residual);
      EXPECT_EQ(back.records[k].dist_to_opt, r.trace.records[k].dist_to_opt);
    }
  }
  std::stringstream bad("iter,x\n");
  EXPECT_THROW(read_trace_csv(bad), ParseError);
}
