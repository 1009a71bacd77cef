#pragma once

#include <string>

#include "ftc/lmi.hpp"
#include "ftc/plant.hpp"

namespace ftc {

struct SynthOptions {
  double margin = 1e-6;
  double pd_margin = 1e-8;
  /// Solve one small LMI per unit and assemble, or one LMI for the whole network.
  bool per_agent = true;
  /// Run the per-unit solves on separate threads.
  bool concurrent = true;
  LmiOptions lmi;
};

struct ObserverSynthesis {
  double delta = 0.0;
  Matrix P;
  Matrix H;
  Matrix gain;         ///< L = P^-1 H
  double margin = 0.0; ///< -lambda_max(Pi) on the whole network
  std::string method;
};

struct ControllerSynthesis {
  double alpha = 0.0;
  double delta = 0.0;
  Matrix R;
  Matrix G;
  Matrix K;            ///< G R^-1
  double gamma = 0.0;
  double margin = 0.0; ///< -lambda_max(Lambda) on the whole network
  std::string method;
};

/// Pi(P, H) = [[P F1 Aa + Aa' F1' P - H E2 - E2' H' + I, P F1 D], [*, -delta^2 I]].
Matrix observer_lmi(const AugmentedModel& aug, const NetworkModel& net, double delta,
                    const Matrix& P, const Matrix& H);

/// Lambda(R, G) = [[A R + R A' + B G + G' B', R, -B, D], [*, -I, 0, 0],
///                 [*, *, -alpha I, 0], [*, *, *, -delta^2 I]].
Matrix controller_lmi(const NetworkModel& net, double alpha, double delta, const Matrix& R,
                      const Matrix& G);

/// 3x3 form before the Schur step, in R: [[Abar + R R, -B, D], [*, -alpha I, 0], [*, *, -delta^2 I]].
Matrix controller_lmi_reduced(const NetworkModel& net, double alpha, double delta, const Matrix& R,
                              const Matrix& G);

/// Same inequality in the original variables Q = R^-1 and K:
/// [[Q(A+BK) + (A+BK)'Q + I, -Q B, Q D], [*, -alpha I, 0], [*, *, -delta^2 I]].
Matrix controller_lmi_qk(const NetworkModel& net, double alpha, double delta, const Matrix& Q,
                         const Matrix& K);

/// Throws DeltaNonPositive, Infeasible, NotHurwitz.
ObserverSynthesis synth_observer(const AugmentedModel& aug, const NetworkModel& net, double delta,
                                 const SynthOptions& options = {});

/// Throws AlphaNonPositive, DeltaNonPositive, Infeasible, NotHurwitz.
ControllerSynthesis synth_controller(const NetworkModel& net, double alpha, double delta,
                                     const SynthOptions& options = {});

/// gamma = sqrt(alpha lambda_max(K'K) + 1) delta
double gamma_bound(const Matrix& K, double alpha, double delta);

}  // namespace ftc
