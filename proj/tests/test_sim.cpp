#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "common.hpp"

using namespace ftc;
using ftc::testing::benchmark_config;
using ftc::testing::clean_config;

namespace {

/// exp(A t) for A with distinct real eigenvalues l1, l2 (Sylvester formula).
Matrix expm_2x2(const Matrix& a, double l1, double l2, double t) {
  const Matrix i2 = Matrix::identity(2);
  return (std::exp(l1 * t) / (l1 - l2)) * (a - l2 * i2) + (std::exp(l2 * t) / (l2 - l1)) * (a - l1 * i2);
}

double linear_final_error(double h) {
  const Matrix a{{0, 1}, {-2, -3}};  // eigenvalues -1, -2
  const Vector x0{1.0, -0.5};
  const auto tr = integrate([&](std::size_t, double, const Vector& x) { return a * x; }, x0, h, 2.0);
  return norm(tr.back() - expm_2x2(a, -1.0, -2.0, 2.0) * x0);
}

double estimation_error(const SimTrace& tr, std::size_t k, std::size_t i) {
  double s = 0.0;
  for (std::size_t c = 0; c < tr.nx; ++c) {
    const double d = tr.x[k][i * tr.nx + c] - tr.x_hat[k][i * tr.nx + c];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

TEST(Integrate, ConstantRhs) {
  const auto tr = integrate([](std::size_t, double, const Vector&) { return Vector{0.0, 0.0}; }, Vector{1.0, -2.0}, 0.1, 1.0);
  ASSERT_EQ(tr.size(), 11u);
  for (const auto& s : tr) {
    EXPECT_EQ(s[0], 1.0);
    EXPECT_EQ(s[1], -2.0);
  }
}

TEST(Integrate, ScalarDecay) {
  const auto tr = integrate([](std::size_t, double, const Vector& x) { return Vector{-x[0]}; }, Vector{1.0}, 0.01, 1.0);
  ASSERT_EQ(tr.size(), 101u);
  EXPECT_NEAR(tr.back()[0], std::exp(-1.0), 1e-8);
}

TEST(Integrate, FourthOrderOnLinearSystem) {
  const double e1 = linear_final_error(0.1), e2 = linear_final_error(0.05), e3 = linear_final_error(0.025);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
  EXPECT_GT(e2 / e3, 12.0);
}

TEST(Integrate, NonFiniteStateReportsTime) {
  try {
    integrate([](std::size_t, double, const Vector& x) { return Vector{x[0] * x[0]}; }, Vector{1.0}, 0.01, 5.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteState);
    EXPECT_NE(std::string(e.what()).find("t="), std::string::npos);
  }
}

TEST(Integrate, StepValidation) {
  EXPECT_THROW(step_count(0.0, 1.0), Error);
  EXPECT_THROW(step_count(-1e-3, 1.0), Error);
  EXPECT_THROW(step_count(0.1, 0.01), Error);
  EXPECT_EQ(step_count(1e-3, 40.0), 40000u);
}

TEST(Schedule, BenchmarkSignals) {
  const SignalSchedule s = benchmark_schedule(4, 1, 1);
  const double h = 1e-3;
  const Exogenous before = s.at(9999, 0.5, h);
  const Exogenous after = s.at(10000, 0.0, h);
  EXPECT_EQ(before.fs[0], 0.0);
  EXPECT_EQ(after.fs[3], 5.75);
  EXPECT_EQ(before.v[2], 0.1);
  EXPECT_EQ(s.at(19999, 1.0, h).y0[0], 1.0);
  EXPECT_EQ(s.at(20000, 0.0, h).y0[0], 2.0);
  EXPECT_EQ(s.fault_index(h), 10000u);
  const auto ev = s.event_indices(h, 40000);
  EXPECT_NE(std::find(ev.begin(), ev.end(), 10000u), ev.end());
  EXPECT_NE(std::find(ev.begin(), ev.end(), 20000u), ev.end());
}

TEST(Schedule, OffGridOnsetSnapped) {
  SignalSchedule s = benchmark_schedule(4, 1, 1);
  s.fault_onset = 10.0004;
  EXPECT_EQ(s.fault_index(1e-3), 10000u);
}

TEST(InitialState, SeededAndBounded) {
  const ExperimentConfig c = benchmark_config();
  const auto& g = ftc::testing::benchmark_gains();
  const ClosedLoop cl = make_closed_loop(g.net, g.aug, g.observer.gain,
                                        ControlLaw{g.controller.K, Vector(4, 90.0), Vector(4, 0.1), c.graph});
  const Vector a = sample_initial_state(cl, 7), b = sample_initial_state(cl, 7), d = sample_initial_state(cl, 8);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, d);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_GE(a[i], -1.0);
    EXPECT_LE(a[i], 1.0);
  }
  for (std::size_t i = 8; i < a.size(); ++i) EXPECT_EQ(a[i], 0.0);
  EXPECT_EQ((g.aug.E1 * g.aug.F2).max_abs(), 0.0);
}

TEST(Experiment, BenchmarkTraceShape) {
  const Experiment ex = run_experiment(benchmark_config());
  EXPECT_EQ(ex.trace.rows(), 40001u);
  EXPECT_NEAR(ex.trace.t.back(), 40.0, 1e-9);
  for (std::size_t k = 0; k < ex.trace.rows(); k += 997) {
    for (double v : ex.trace.x[k]) EXPECT_TRUE(std::isfinite(v));
  }
  // fault estimates settle at the injected magnitude
  for (double f : ex.trace.f_hat.back()) EXPECT_NEAR(f, 5.75, 0.02 * 5.75);
}

TEST(Experiment, EstimationErrorConvergesWithoutDisturbance) {
  ExperimentConfig c = benchmark_config();
  c.signals.disturbance.assign(4, 0.0);
  const Experiment ex = run_experiment(c);
  const auto& tr = ex.trace;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_LT(estimation_error(tr, 9999, i), 1e-2) << i;
    EXPECT_LT(estimation_error(tr, tr.rows() - 1, i), 1e-2) << i;
  }
  // the fault jump enters x_o through F2 y_f, so the state estimate stays converged
  for (std::size_t k = 10000; k < tr.rows(); k += 500)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(estimation_error(tr, k, i), 1e-2) << k;
  for (double f : tr.f_hat[10500]) EXPECT_NEAR(f, 5.75, 0.02 * 5.75);
}

TEST(Experiment, EstimationErrorDecaysBelowMicroInCleanRun) {
  const Experiment ex = run_experiment(clean_config());
  const auto& tr = ex.trace;
  const std::size_t k = tr.rows() - 1;
  Vector eps;
  for (std::size_t i = 0; i < tr.x[k].size(); ++i) eps.push_back(tr.x[k][i] - tr.x_hat[k][i]);
  for (std::size_t i = 0; i < tr.fs[k].size(); ++i) eps.push_back(tr.fs[k][i] - tr.f_hat[k][i]);
  EXPECT_LT(norm(eps), 1e-6);
}

TEST(Experiment, StepHalvingConvergence) {
  // short horizon: the loop settles to round-off within a few seconds
  ExperimentConfig c = benchmark_config();
  c.sim.T = 0.5;
  c.signals.fault_onset = 0.2;
  c.signals.setpoint = {{0.0, 1.0, 0.0}, {0.3, 2.0, 0.0}};
  const auto final_state = [&](double h) {
    ExperimentConfig cc = c;
    cc.sim.h = h;
    const SimTrace tr = run_experiment(cc).trace;
    return concat({tr.x.back(), tr.eta.back(), tr.q.back()});
  };
  const Vector s1 = final_state(4e-3), s2 = final_state(2e-3), s3 = final_state(1e-3);
  EXPECT_GE(norm(s1 - s2) / norm(s2 - s3), 8.0);
}

TEST(Experiment, Deterministic) {
  ExperimentConfig c = benchmark_config();
  c.sim.T = 2.0;
  std::ostringstream a, b;
  write_trace_csv(a, run_experiment(c).trace);
  write_trace_csv(b, run_experiment(c).trace);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Experiment, VirtualObserverCoIntegration) {
  ExperimentConfig c = benchmark_config();
  c.sim.T = 15.0;
  c.sim.virtual_observer = true;
  const SimTrace tr = run_experiment(c).trace;
  ASSERT_EQ(tr.x_virtual.size(), tr.rows());
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.rows(); ++k)
    worst = std::max(worst, norm(tr.x_virtual[k] - concat({tr.x_hat[k], tr.f_hat[k]})));
  EXPECT_LE(worst, 1e-6);
}

TEST(Trace, ColumnsAndRoundTrip) {
  ExperimentConfig c = benchmark_config();
  c.sim.T = 0.5;
  const SimTrace tr = run_experiment(c).trace;
  const auto cols = trace_columns(tr);
  // t, x, eta, q, xhat, fhat, u, yf, ebar, v, fs, y0
  EXPECT_EQ(cols.size(), 1u + 8 + 12 + 4 + 8 + 4 + 4 + 4 + 4 + 4 + 4 + 1);
  EXPECT_EQ(cols.front(), "t");
  EXPECT_EQ(cols[1], "x[1][1]");
  EXPECT_EQ(cols.back(), "y0");
  std::stringstream csv;
  write_trace_csv(csv, tr);
  const std::string text = csv.str();
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const SimTrace back = read_trace_csv(csv, 4, 2, 1, 1, 1);
  ASSERT_EQ(back.rows(), tr.rows());
  for (std::size_t k = 0; k < tr.rows(); ++k) {
    EXPECT_EQ(back.x[k], tr.x[k]);
    EXPECT_EQ(back.f_hat[k], tr.f_hat[k]);
    EXPECT_EQ(back.y0[k], tr.y0[k]);
  }
}

TEST(Trace, TruncatedColumnsRejected) {
  ExperimentConfig c = benchmark_config();
  c.sim.T = 0.1;
  std::stringstream csv;
  write_trace_csv(csv, run_experiment(c).trace);
  std::string text = csv.str();
  // drop the last column of every line
  std::string cut;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) cut += line.substr(0, line.rfind(',')) + "\n";
  std::istringstream in(cut);
  try {
    read_trace_csv(in, 4, 2, 1, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
  }
}
