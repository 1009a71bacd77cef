#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"

using namespace ftc;
using ftc::testing::benchmark_config;
using ftc::testing::benchmark_gains;
using ftc::testing::clean_config;

namespace {

const Experiment& benchmark_run() {
  static const Experiment ex = run_experiment(benchmark_config());
  return ex;
}

const Experiment& clean_run() {
  static const Experiment ex = run_experiment(clean_config());
  return ex;
}

}  // namespace

TEST(IssCertificate, IdentityClosedForms) {
  const IssCertificate c = iss_certificate(-1.0 * Matrix::identity(2), Matrix::identity(2), 2.0 * Matrix::identity(2));
  EXPECT_NEAR((c.P_e - Matrix::identity(2)).max_abs(), 0.0, 1e-14);
  EXPECT_NEAR(c.c1, 1.0, 1e-14);
  EXPECT_NEAR(c.alpha, 1.0, 1e-14);
  EXPECT_NEAR(c.c2, 0.5, 1e-14);
  // kappa = |P_e B| = 1, beta = 2 / 2 = 1, c3 = sqrt(1 / (1 * 1))
  EXPECT_NEAR(c.kappa, 1.0, 1e-14);
  EXPECT_NEAR(c.beta, 1.0, 1e-14);
  EXPECT_NEAR(c.c3, 1.0, 1e-14);
}

TEST(IssCertificate, DiagonalClosedForms) {
  const IssCertificate c = iss_certificate(Matrix{{-1, 0}, {0, -2}}, Matrix::identity(2), Matrix::identity(2));
  EXPECT_NEAR(c.P_e(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(c.P_e(1, 1), 0.25, 1e-15);
  EXPECT_NEAR(c.c1, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(c.alpha, 1.0, 1e-14);
  EXPECT_NEAR(c.c2, 0.5, 1e-14);
}

TEST(IssCertificate, IdentityGraphAndMinusIdentityLoop) {
  // A + B K = -I through A = 0, B = I, K = -I on a single unit with L = [1]
  const AgentModel a{Matrix(2, 2), Matrix::identity(2), Matrix{{1, 0}}, Matrix{{0}, {0}}, Matrix{{1}}};
  const NetworkModel net = stack_network({a});
  const NetworkGraph g = build_graph(1, {}, {{1, 1.0}});
  const IssCertificate c = iss_certificate(g, net, -1.0 * Matrix::identity(2), 2.0 * Matrix::identity(2));
  EXPECT_NEAR((c.P_e - Matrix::identity(2)).max_abs(), 0.0, 1e-14);
  EXPECT_NEAR(c.c1, 1.0, 1e-14);
  EXPECT_NEAR(c.c2, 0.5, 1e-14);
}

TEST(IssCertificate, BenchmarkTopologies) {
  const auto& gains = benchmark_gains();
  for (Topology t : {Topology::kStar, Topology::kCyclic, Topology::kPath}) {
    const NetworkGraph g = normalize_weights(named_topology(t, 4));
    const IssCertificate c = iss_certificate(g, gains.net, gains.controller.K, Matrix::identity(8));
    EXPECT_LE(c.residual, 1e-8);
    EXPECT_GT(min_eigenvalue(c.P_e), 0.0);
    for (double v : {c.kappa, c.alpha, c.beta, c.c1, c.c2, c.c3}) {
      EXPECT_GT(v, 0.0);
      EXPECT_TRUE(std::isfinite(v));
    }
    EXPECT_TRUE(is_hurwitz(c.Phi));
  }
}

TEST(IssCertificate, UnstableLoopRejected) {
  const auto& gains = benchmark_gains();
  const NetworkGraph g = normalize_weights(named_topology(Topology::kStar, 4));
  Matrix positive(4, 8);
  for (std::size_t i = 0; i < 4; ++i) positive(i, 2 * i + 1) = 10.0;
  EXPECT_THROW(iss_certificate(g, gains.net, positive, Matrix::identity(8)), Error);
  const NetworkGraph bad = build_graph(2, {}, {{1, 1.0}});
  const NetworkModel two = stack_network(ftc::testing::motors(2));
  try {
    iss_certificate(bad, two, Matrix(2, 4), Matrix::identity(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotPositiveStable);
  }
}

TEST(CooperativeStateError, Examples) {
  const NetworkGraph star = normalize_weights(named_topology(Topology::kStar, 4));
  const NetworkGraph path = normalize_weights(named_topology(Topology::kPath, 4));
  const Vector x0{0.3, -0.2};
  Vector same;
  for (int i = 0; i < 4; ++i) same.insert(same.end(), x0.begin(), x0.end());
  EXPECT_LE(norm(cooperative_state_error(path, same, x0)), 1e-15);

  std::mt19937_64 rng(9);
  const Vector x = ftc::testing::random_vector(8, rng), y = ftc::testing::random_vector(8, rng);
  const Vector e = cooperative_state_error(star, x, x0);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(e[i], x[i] - x0[i % 2]);

  const Vector zero{0.0, 0.0};
  const Vector lin = cooperative_state_error(path, x + y, zero) -
                     (cooperative_state_error(path, x, zero) + cooperative_state_error(path, y, zero));
  EXPECT_LE(norm(lin), 1e-14);
  EXPECT_THROW(cooperative_state_error(path, x, Vector{1.0}), Error);
}

TEST(IssBound, ZeroTraceIsTrivial) {
  ExperimentConfig c = clean_config();
  c.zero_initial_state = true;
  c.signals.setpoint = {{0.0, 0.0, 0.0}};
  c.sim.T = 2.0;
  const Experiment ex = run_experiment(c);
  const IssCertificate cert = iss_certificate(c.graph, ex.net, *c.feedback_gain, Matrix::identity(8));
  const IssReport r = verify_iss_bound(ex.trace, cert, c.graph, ex.net, *c.feedback_gain);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_violation, 0.0);
}

TEST(IssBound, HoldsOnCleanAndFullRuns) {
  for (const Experiment* ex : {&clean_run(), &benchmark_run()}) {
    const auto& K = benchmark_gains().controller.K;
    const NetworkGraph& g = ex->loop.law.graph;
    const IssCertificate cert = iss_certificate(g, ex->net, K, Matrix::identity(8));
    const IssReport r = verify_iss_bound(ex->trace, cert, g, ex->net, K);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.max_violation, 1e-9);
    EXPECT_TRUE(r.consistent);
    EXPECT_LE(r.equilibrium_gap, 1e-10);
  }
}

TEST(IssBound, DetectsDivergingState) {
  Experiment ex = benchmark_run();
  for (std::size_t k = 30000; k < ex.trace.rows(); ++k) ex.trace.x[k][0] += 1e3 * (ex.trace.t[k] - 30.0);
  const auto& K = benchmark_gains().controller.K;
  const IssCertificate cert = iss_certificate(ex.loop.law.graph, ex.net, K, Matrix::identity(8));
  EXPECT_FALSE(verify_iss_bound(ex.trace, cert, ex.loop.law.graph, ex.net, K).pass);
}

TEST(Equilibrium, OpenOuterLoopConvergesToComputedPoint) {
  // with the outer loop off, theta* -> 0 and e_x settles at e*
  ExperimentConfig c = clean_config();
  c.ell_P = 0.0;
  c.ell_I = 0.0;
  c.signals.setpoint = {{0.0, 1.0, 0.0}};
  const Experiment ex = run_experiment(c);
  const auto& K = *c.feedback_gain;
  const IssCertificate cert = iss_certificate(c.graph, ex.net, K, Matrix::identity(8));
  const IssReport r = verify_iss_bound(ex.trace, cert, c.graph, ex.net, K);
  EXPECT_TRUE(r.pass) << r.max_violation << " at " << r.worst_index << " consistency " << r.consistency;
  const Vector x0 = source_state(ex.net, ex.trace.y0.back());
  const Vector ex_final = cooperative_state_error(c.graph, ex.trace.x.back(), x0);
  // e* solves Phi e* = -phi0 and equals -(A_0 (x) I) x0_bar
  Vector e_star;
  for (std::size_t i = 0; i < 4; ++i)
    for (double v : x0) e_star.push_back(-c.graph.source(i, i) * v);
  EXPECT_LT(norm(ex_final - e_star), 1e-6);
}

TEST(Dissipation, BenchmarkRun) {
  const auto& ex = benchmark_run();
  const DissipationReport r = dissipation_check(ex.trace, ex.aug, ex.net, benchmark_gains().observer);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_d, 1e-9);
  EXPECT_TRUE(r.fd_ok);
}

TEST(Dissipation, StorageDecreasesWithoutDisturbance) {
  const auto& ex = clean_run();
  const DissipationReport r = dissipation_check(ex.trace, ex.aug, ex.net, benchmark_gains().observer);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.monotone_without_disturbance);
}

TEST(Dissipation, FiniteDifferenceIsSecondOrder) {
  const auto deviation = [](double h) {
    ExperimentConfig c = benchmark_config();
    c.sim.h = h;
    c.sim.T = 5.0;
    const Experiment ex = run_experiment(c);
    return dissipation_check(ex.trace, ex.aug, ex.net, benchmark_gains().observer).fd_deviation;
  };
  const double d1 = deviation(2e-3), d2 = deviation(1e-3);
  EXPECT_GT(d1 / d2, 3.0);
  EXPECT_LT(d1 / d2, 5.0);
}

TEST(Consensus, IdenticalAgentsStayTogether) {
  ExperimentConfig c = clean_config();
  c.agents = std::vector<AgentModel>(4, dc_motor_agent(1));
  c.observer_gain.reset();
  c.feedback_gain.reset();
  c.zero_initial_state = true;
  c.sim.T = 10.0;
  const Experiment ex = run_experiment(c);
  const ConsensusReport r = consensus_report(ex.trace, ex.net);
  EXPECT_LE(r.disagreement, 1e-12);
}

TEST(Consensus, ReportFields) {
  const auto& ex = benchmark_run();
  const ConsensusReport r = consensus_report(ex.trace, ex.net);
  EXPECT_EQ(r.offset.size(), 4u);
  EXPECT_EQ(r.settling_time.size(), 4u);
  for (double o : r.offset) EXPECT_TRUE(std::isfinite(o));
  EXPECT_LE(r.final_error_norm, r.max_error_norm);
}

TEST(ConsensusEquivalence, NamedTopologies) {
  for (Topology t : {Topology::kStar, Topology::kCyclic, Topology::kPath}) {
    const EquivalenceReport r = consensus_equivalence_check(normalize_weights(named_topology(t, 4)), 1, 3);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.forward, 1e-10);
    EXPECT_LE(r.backward, 1e-8);
    EXPECT_LE(r.perturbation, 1e-8);
  }
}

TEST(ConsensusEquivalence, MultiOutput) {
  EXPECT_TRUE(consensus_equivalence_check(random_reachable_graph(5, 77), 2, 77).pass);
}

TEST(GainRatio, ZeroStateBenchmark) {
  ExperimentConfig c = benchmark_config();
  c.zero_initial_state = true;
  c.signals.setpoint = {{0.0, 0.0, 0.0}};
  const Experiment ex = run_experiment(c);
  const auto& ctl = benchmark_gains().controller;
  const GainRatioReport r = l2_gain_ratio(ex.trace, ctl.K, ctl.gamma);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.ratio, 1.05 * ctl.gamma);
  EXPECT_GT(r.theta_norm, 0.0);
}

TEST(Boundedness, RampSweep) {
  const auto run = [](double rate) {
    ExperimentConfig c = clean_config();
    c.sim.T = 80.0;
    c.signals.setpoint = {{0.0, 1.0, rate}};
    const SimTrace tr = run_experiment(c).trace;
    return summarize_ramp_run(tr, c.graph, *c.feedback_gain, rate);
  };
  std::vector<RampRun> runs;
  for (double rate : {0.0, 0.025, 0.05, 0.1}) runs.push_back(run(rate));
  const BoundednessReport r = timevarying_reference_boundedness(runs);
  EXPECT_TRUE(r.all_finite);
  EXPECT_TRUE(r.doubling_ok);
  EXPECT_LE(r.max_doubling_ratio, 2.5);
  EXPECT_TRUE(r.envelope_ok);
  EXPECT_TRUE(r.pass);
}

TEST(Boundedness, ZeroRateMatchesConstantSetpoint) {
  ExperimentConfig a = clean_config(), b = clean_config();
  a.sim.T = b.sim.T = 5.0;
  a.signals.setpoint = {{0.0, 1.0, 0.0}};
  b.signals.setpoint = {{0.0, 1.0}};
  const RampRun ra = summarize_ramp_run(run_experiment(a).trace, a.graph, *a.feedback_gain, 0.0);
  const RampRun rb = summarize_ramp_run(run_experiment(b).trace, b.graph, *b.feedback_gain, 0.0);
  EXPECT_EQ(ra.sup_error, rb.sup_error);
}

TEST(Boundedness, RequiresZeroRate) {
  EXPECT_THROW(timevarying_reference_boundedness({RampRun{0.1, 1.0, 1.0, true}}), Error);
}
