#pragma once

#include "ftc/estimator.hpp"
#include "ftc/graph.hpp"
#include "ftc/plant.hpp"

namespace ftc {

/// u = K x_hat - (ell_P e + ell_I q), q' = e, applied per unit.
struct ControlLaw {
  Matrix K;
  Vector ell_P;  ///< one gain per unit
  Vector ell_I;  ///< one gain per unit
  NetworkGraph graph;
};

/// z = (A_m (x) I) y_hat + (A_0 (x) I)(1 (x) y0)
Vector in_neighbor_setpoint(const NetworkGraph& g, std::span<const double> y_hat, std::span<const double> y0);

/// e = (L (x) I) y_hat - (A_0 (x) I)(1 (x) y0). Cross-checked against W y_hat - z
/// (which is y_hat - z on a normalized graph); throws IdentityCheckFailed on mismatch.
Vector cooperative_error(const NetworkGraph& g, std::span<const double> y_hat, std::span<const double> y0);

/// u = K E1 x_o - (ell_P o e + ell_I o q). Requires nu == ny per unit.
Vector control_input(const ControlLaw& law, const Matrix& E1, std::span<const double> x_o,
                     std::span<const double> e_bar, std::span<const double> q);

/// Everything the closed loop needs.
struct ClosedLoop {
  NetworkModel net;
  AugmentedModel aug;
  ObserverRealization obs;
  ControlLaw law;

  std::size_t dim() const { return net.state_dim() + net.augmented_dim() + net.output_dim(); }
};

ClosedLoop make_closed_loop(const NetworkModel& net, const AugmentedModel& aug, const Matrix& observer_gain,
                            ControlLaw law);

struct Exogenous {
  Vector v;   ///< m nv
  Vector fs;  ///< m ny
  Vector y0;  ///< ny
};

/// Signals computed from the closed-loop state s = [x; eta; q].
struct LoopSignals {
  Vector y_f;
  Vector x_o;
  Vector x_hat;
  Vector f_hat;
  Vector y_hat;
  Vector e;
  Vector u;
};

LoopSignals loop_signals(const ClosedLoop& cl, std::span<const double> s, const Exogenous& w);

/// d/dt [x; eta; q] = [A x + B u + D v; A_obs eta + B_u u + B_y y_f; e].
Vector closed_loop_rhs(const ClosedLoop& cl, std::span<const double> s, const Exogenous& w);

/// Homogeneous system matrix of closed_loop_rhs (all exogenous signals zero).
Matrix closed_loop_matrix(const ClosedLoop& cl);

}  // namespace ftc
