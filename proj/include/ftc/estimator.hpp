#pragma once

#include <functional>
#include <vector>

#include "ftc/plant.hpp"
#include "ftc/synth.hpp"

namespace ftc {

/// eta' = A_obs eta + B_u u + B_y y_f,  x_o = eta + F2 y_f.
struct ObserverRealization {
  Matrix A_obs;  ///< F1 Aa - L E2
  Matrix B_u;    ///< F1 B
  Matrix B_y;    ///< A_obs F2 + L
  Matrix F2;
  Matrix gain;   ///< L
  std::size_t nx_total = 0;
  std::size_t ny_total = 0;

  std::size_t dim() const { return A_obs.rows(); }
};

struct EstimateSplit {
  Vector x_hat;
  Vector f_hat;
};

/// Throws NotHurwitz when F1 Aa - L E2 is not Hurwitz.
ObserverRealization build_observer(const AugmentedModel& aug, const NetworkModel& net, const Matrix& gain);
ObserverRealization build_observer(const AugmentedModel& aug, const NetworkModel& net,
                                   const ObserverSynthesis& synth);

Vector observer_derivative(const ObserverRealization& obs, std::span<const double> eta,
                           std::span<const double> y_f, std::span<const double> u);

/// x_o = eta + F2 y_f, split into the state and fault blocks.
EstimateSplit extract_estimates(const ObserverRealization& obs, std::span<const double> eta,
                                std::span<const double> y_f);

/// x_o' = F1 Aa x_o + F1 B u + F2 E2 xa' + L (y_f - E2 x_o). Needs the true xa'.
Vector virtual_observer_derivative(const AugmentedModel& aug, const NetworkModel& net, const Matrix& gain,
                                   std::span<const double> x_o, std::span<const double> u,
                                   std::span<const double> y_f, std::span<const double> xa_dot);

/// Exogenous inputs for the open-loop oracle run.
struct OracleSignals {
  Vector u;
  Vector v;
  Vector fs;
  Vector fs_dot;
};

struct OracleTrace {
  std::vector<Vector> x;           ///< plant state
  std::vector<Vector> x_virtual;   ///< x_o from the virtual observer
  std::vector<Vector> x_realized;  ///< eta + F2 y_f from the realizable observer
};

/// Drives the plant with signals(t) and integrates both observer forms with RK4 on the
/// same grid. The realizable observer starts at eta(0) = x_o(0) - F2 E2 x_a(0).
/// Fault signals must be differentiable; fs_dot feeds the fault part of xa'.
OracleTrace virtual_observer_oracle(const AugmentedModel& aug, const NetworkModel& net, const Matrix& gain,
                                    std::span<const double> x0, std::span<const double> x_o0, double h,
                                    std::size_t steps, const std::function<OracleSignals(double)>& signals);

}  // namespace ftc
