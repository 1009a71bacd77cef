#pragma once

#include <cstdint>
#include <vector>

#include "ftc/graph.hpp"
#include "ftc/plant.hpp"
#include "ftc/sim.hpp"
#include "ftc/synth.hpp"

namespace ftc {

struct IssCertificate {
  Matrix Phi;    ///< (L (x) I)(A + B K)(L (x) I)^-1
  Matrix B_phi;  ///< (L (x) I)[D, -B]
  Matrix Q;
  Matrix P_e;    ///< Phi' P_e + P_e Phi + Q = 0
  double kappa = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double residual = 0.0;  ///< ||Phi' P_e + P_e Phi + Q||_F
};

/// Constants from a given Phi, B_phi and Q. Throws NotHurwitz.
IssCertificate iss_certificate(const Matrix& Phi, const Matrix& B_phi, const Matrix& Q);
/// Throws NotPositiveStable, NotHurwitz.
IssCertificate iss_certificate(const NetworkGraph& g, const NetworkModel& net, const Matrix& K,
                               const Matrix& Q);

/// e_x = (L (x) I) x - (A_0 (x) I)(1 (x) x0)
Vector cooperative_state_error(const NetworkGraph& g, std::span<const double> x, std::span<const double> x0);

/// Designated source state for setpoint y0: the minimum-norm solution of C_1 x0 = y0.
Vector source_state(const NetworkModel& net, std::span<const double> y0);

/// theta* = [v; K x - u] at trace row k (equals [v; K E1 eps + outer-loop term]).
Vector theta_star(const SimTrace& tr, const Matrix& K, std::size_t k);
/// theta = [v; K (x - x_hat)] at trace row k.
Vector theta_bar(const SimTrace& tr, const Matrix& K, std::size_t k);

struct IssReport {
  bool pass = false;
  double max_violation = 0.0;   ///< max over samples of (||e~|| - bound) / max(bound, tiny)
  std::size_t worst_index = 0;
  std::size_t samples = 0;
  double consistency = 0.0;     ///< max relative Simpson residual of e~' = Phi e~ + B_phi theta*
  bool consistent = false;
  double equilibrium_gap = 0.0; ///< || e* - (-(A_0 (x) I) x0_bar) || from the linear solve
  double x0_output_mismatch = 0.0;
};

/// Applies the exponential-plus-sup bound to e~ = e_x - e* from t = 0 and again from
/// every event index, and checks that the trace obeys the error dynamics in between.
IssReport verify_iss_bound(const SimTrace& tr, const IssCertificate& cert, const NetworkGraph& g,
                           const NetworkModel& net, const Matrix& K, double consistency_tol = 1e-3);

struct DissipationReport {
  bool pass = false;
  double max_d = 0.0;            ///< max of V' + |eps|^2 - delta^2 |v|^2
  std::size_t worst_index = 0;
  std::size_t samples = 0;
  double fd_deviation = 0.0;     ///< max |centered FD of V - analytic V'| / max |V'|
  bool fd_ok = false;
  bool monotone_without_disturbance = true;
};

/// eps = [x - x_hat; fs - f_hat]. Samples adjacent to events are skipped.
DissipationReport dissipation_check(const SimTrace& tr, const AugmentedModel& aug, const NetworkModel& net,
                                    const ObserverSynthesis& obs, double tol = 1e-9, double fd_tol = 1e-3);

struct ConsensusReport {
  Vector settling_time;  ///< per unit, from the last setpoint change; +inf if not settled
  Vector offset;         ///< |y_i(T) - y0(T)|
  double max_offset = 0.0;
  double disagreement = 0.0;  ///< max_ij |y_i(T) - y_j(T)|
  double max_error_norm = 0.0;
  double final_error_norm = 0.0;
  double max_settling = 0.0;
};

/// y_i = C_i x_i. Band is a fraction of |y0(T)|.
ConsensusReport consensus_report(const SimTrace& tr, const NetworkModel& net, double band = 0.02);

struct GainRatioReport {
  double x_norm = 0.0;
  double theta_norm = 0.0;
  double ratio = 0.0;
  double gamma = 0.0;
  bool pass = false;
};

/// Rectangle-rule L2 norms of x and theta = [v; K(x - x_hat)].
GainRatioReport l2_gain_ratio(const SimTrace& tr, const Matrix& K, double gamma, double tol = 0.05);

struct RampRun {
  double rate = 0.0;
  double sup_error = 0.0;  ///< sup ||e~||
  double sup_theta = 0.0;  ///< sup ||theta*||
  bool finite = true;
};

RampRun summarize_ramp_run(const SimTrace& tr, const NetworkGraph& g, const Matrix& K, double rate);

struct BoundednessReport {
  std::vector<RampRun> runs;
  bool all_finite = false;
  double max_doubling_ratio = 0.0;
  bool doubling_ok = false;
  double intercept = 0.0;
  double slope = 0.0;
  bool envelope_ok = false;
  bool pass = false;
};

/// Runs must include rate 0. Checks finiteness, growth <= 2.5x when a rate doubles, and
/// that every run lies under the chord sup_error <= intercept + slope * rate fitted to
/// the zero-rate and the largest-rate runs.
BoundednessReport timevarying_reference_boundedness(std::vector<RampRun> runs);

struct EquivalenceReport {
  double forward = 0.0;      ///< max ||e|| over consensus inputs
  double backward = 0.0;     ///< max |y_hat_i - y0| solving e = 0
  double perturbation = 0.0; ///< max |y_hat_i - y0| over inputs with ||e|| = 1e-10
  bool pass = false;
};

EquivalenceReport consensus_equivalence_check(const NetworkGraph& g, std::size_t ny, std::uint64_t seed, int trials = 20);

/// Random graph on m units whose nodes are all reachable from the source, normalized.
NetworkGraph random_reachable_graph(std::size_t m, std::uint64_t seed);

}  // namespace ftc
