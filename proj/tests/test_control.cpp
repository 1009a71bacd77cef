#include <gtest/gtest.h>

#include "common.hpp"
#include "ftc/control.hpp"

using namespace ftc;
using ftc::testing::benchmark_gains;
using ftc::testing::random_vector;

namespace {

NetworkGraph graph_of(Topology t) { return normalize_weights(named_topology(t, 4)); }

ControlLaw benchmark_law(const NetworkGraph& g) {
  return ControlLaw{benchmark_gains().controller.K, Vector(4, 90.0), Vector(4, 0.1), g};
}

}  // namespace

TEST(Setpoint, StarSeesSource) {
  const Vector z = in_neighbor_setpoint(graph_of(Topology::kStar), Vector{1, 2, 3, 4}, Vector{0.7});
  for (double zi : z) EXPECT_DOUBLE_EQ(zi, 0.7);
}

TEST(Setpoint, CyclicWeightArithmetic) {
  const Vector z = in_neighbor_setpoint(graph_of(Topology::kCyclic), Vector{1, 2, 3, 4}, Vector{0.0});
  EXPECT_NEAR(z[0], 1.8, 1e-15);
}

TEST(Setpoint, ConsensusIsFixedPoint) {
  for (Topology t : {Topology::kStar, Topology::kCyclic, Topology::kPath}) {
    const Vector z = in_neighbor_setpoint(graph_of(t), Vector(4, 1.25), Vector{1.25});
    for (double zi : z) EXPECT_NEAR(zi, 1.25, 1e-15);
  }
}

TEST(CooperativeError, Examples) {
  for (Topology t : {Topology::kStar, Topology::kCyclic, Topology::kPath}) {
    EXPECT_LE(norm(cooperative_error(graph_of(t), Vector(4, -0.4), Vector{-0.4})), 1e-15);
  }
  const Vector y{1, 2, 3, 4};
  const Vector e = cooperative_error(graph_of(Topology::kStar), y, Vector{0.5});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(e[i], y[i] - 0.5);
}

TEST(CooperativeError, TwoPathsAgreeOnRandomInputs) {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t m = 1 + seed % 6;
    const NetworkGraph g = random_reachable_graph(m, seed);
    for (std::size_t ny : {1u, 2u}) {
      const Vector y = random_vector(m * ny, rng), y0 = random_vector(ny, rng);
      const Vector e = cooperative_error(g, y, y0);
      const Vector z = in_neighbor_setpoint(g, y, y0);
      EXPECT_LE(norm(e - (y - z)), 1e-12);
    }
  }
}

TEST(ControlInput, Examples) {
  const auto& gains = benchmark_gains();
  const ControlLaw law = benchmark_law(graph_of(Topology::kStar));
  EXPECT_EQ(norm(control_input(law, gains.aug.E1, Vector(12), Vector(4), Vector(4))), 0.0);
  const Vector u = control_input(law, gains.aug.E1, Vector(12), Vector{1, 0, 0, 0}, Vector(4));
  EXPECT_DOUBLE_EQ(u[0], -90.0);
  EXPECT_EQ(u[1], 0.0);
  EXPECT_EQ(u[2], 0.0);
  EXPECT_EQ(u[3], 0.0);
  const Vector uq = control_input(law, gains.aug.E1, Vector(12), Vector(4), Vector{0, 2, 0, 0});
  EXPECT_DOUBLE_EQ(uq[1], -0.2);
}

TEST(ControlInput, Superposition) {
  const auto& gains = benchmark_gains();
  const ControlLaw law = benchmark_law(graph_of(Topology::kPath));
  std::mt19937_64 rng(23);
  const Vector x1 = random_vector(12, rng), x2 = random_vector(12, rng);
  const Vector e1 = random_vector(4, rng), e2 = random_vector(4, rng);
  const Vector q1 = random_vector(4, rng), q2 = random_vector(4, rng);
  const Vector lhs = control_input(law, gains.aug.E1, x1 + x2, e1 + e2, q1 + q2);
  const Vector rhs = control_input(law, gains.aug.E1, x1, e1, q1) + control_input(law, gains.aug.E1, x2, e2, q2);
  EXPECT_LE(norm(lhs - rhs), 1e-12);
}

TEST(ClosedLoop, EquilibriumAndDimension) {
  const auto& gains = benchmark_gains();
  const ClosedLoop cl = make_closed_loop(gains.net, gains.aug, gains.observer.gain, benchmark_law(graph_of(Topology::kStar)));
  EXPECT_EQ(cl.dim(), 24u);
  const Exogenous w{Vector(4), Vector(4), Vector{0.0}};
  EXPECT_EQ(norm(closed_loop_rhs(cl, Vector(24), w)), 0.0);
}

TEST(ClosedLoop, LinearSystemIsHurwitz) {
  const auto& gains = benchmark_gains();
  for (Topology t : {Topology::kStar, Topology::kCyclic, Topology::kPath}) {
    const ClosedLoop cl = make_closed_loop(gains.net, gains.aug, gains.observer.gain, benchmark_law(graph_of(t)));
    const Matrix a = closed_loop_matrix(cl);
    EXPECT_EQ(a.rows(), 24u);
    EXPECT_TRUE(is_hurwitz(a)) << topology_name(t);
    std::mt19937_64 rng(31);
    const Vector s = random_vector(24, rng);
    EXPECT_LE(norm(a * s - closed_loop_rhs(cl, s, Exogenous{Vector(4), Vector(4), Vector{0.0}})), 1e-10);
  }
}

TEST(ClosedLoop, SignalsWiring) {
  const auto& gains = benchmark_gains();
  const ClosedLoop cl = make_closed_loop(gains.net, gains.aug, gains.observer.gain, benchmark_law(graph_of(Topology::kCyclic)));
  std::mt19937_64 rng(41);
  const Vector s = random_vector(24, rng);
  const Exogenous w{Vector(4, 0.1), Vector(4, 5.75), Vector{2.0}};
  const LoopSignals sig = loop_signals(cl, s, w);
  const Vector x(s.begin(), s.begin() + 8);
  EXPECT_LE(norm(sig.y_f - (gains.net.C * x + w.fs)), 1e-14);
  EXPECT_LE(norm(sig.y_hat - gains.net.C * sig.x_hat), 1e-14);
  EXPECT_LE(norm(sig.e - cooperative_error(cl.law.graph, sig.y_hat, w.y0)), 1e-14);
  const Vector ds = closed_loop_rhs(cl, s, w);
  const Vector dq(ds.begin() + 20, ds.end());
  EXPECT_LE(norm(dq - sig.e), 0.0);
}
