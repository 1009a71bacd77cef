#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ftc/control.hpp"
#include "ftc/synth.hpp"

namespace ftc {

/// y0(t) = value + slope (t - start) from `start` until the next segment.
struct SetpointSegment {
  double start = 0.0;
  double value = 0.0;
  double slope = 0.0;
};

/// Event times are snapped to the integration grid; piecewise-constant parts are
/// evaluated at the start of each step so jumps happen exactly at grid points.
struct SignalSchedule {
  Vector disturbance;  ///< m nv constant levels
  double disturbance_start = 0.0;
  double disturbance_end = std::numeric_limits<double>::infinity();
  Vector fault_magnitude;  ///< m ny step heights
  double fault_onset = 10.0;
  std::vector<SetpointSegment> setpoint;  ///< sorted by start, first start must be 0
  std::size_t ny = 1;                     ///< y0 is broadcast to every output channel

  /// Signals for the RK4 stage at time (k + frac) h.
  Exogenous at(std::size_t k, double frac, double h) const;
  /// Grid indices where some piecewise-constant signal jumps.
  std::vector<std::size_t> event_indices(double h, std::size_t steps) const;
  std::size_t fault_index(double h) const;
};

SignalSchedule benchmark_schedule(std::size_t m, std::size_t nv, std::size_t ny);

struct SimTrace {
  std::size_t m = 0, nx = 0, nu = 0, ny = 0, nv = 0;
  double h = 0.0;
  std::vector<double> t;
  std::vector<Vector> x, eta, q, x_hat, f_hat, u, y_f, e, v, fs, y0;
  std::vector<Vector> x_virtual;  ///< only when the virtual observer is co-integrated
  std::vector<std::size_t> events;
  std::size_t fault_step = 0;

  std::size_t rows() const { return t.size(); }
};

/// Classical RK4 on a fixed grid. rhs(k, frac, s) evaluates at time (k + frac) h.
/// Throws NonFiniteState with the first offending time (t0 + elapsed).
std::vector<Vector> integrate(const std::function<Vector(std::size_t, double, const Vector&)>& rhs,
                              const Vector& s0, double h, double T, double t0 = 0.0);

/// Grid size for horizon T; throws ValidationError unless h > 0 and T >= h.
std::size_t step_count(double h, double T);

/// x uniform in [lo, hi] from a seeded mt19937_64; eta = 0, q = 0.
Vector sample_initial_state(const ClosedLoop& cl, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

struct SimOptions {
  double h = 1e-3;
  double T = 40.0;
  /// Also integrate the virtual observer (true xa' fed in, impulse at fault jumps).
  bool virtual_observer = false;
};

SimTrace simulate(const ClosedLoop& cl, const SignalSchedule& signals, const Vector& s0, const SimOptions& options);

/// Full pipeline input: graph, plant, synthesis parameters or fixed gains, signals.
struct ExperimentConfig {
  NetworkGraph graph;  ///< normalized
  std::vector<AgentModel> agents;
  double delta = 0.3;
  double alpha = 0.2;
  SynthOptions synth;
  std::optional<Matrix> observer_gain;
  std::optional<Matrix> feedback_gain;
  double ell_P = 90.0;
  double ell_I = 0.1;
  SignalSchedule signals;
  SimOptions sim;
  std::uint64_t seed = 1;
  double init_low = -1.0;
  double init_high = 1.0;
  bool zero_initial_state = false;
};

struct Experiment {
  NetworkModel net;
  AugmentedModel aug;
  std::optional<ObserverSynthesis> observer;
  std::optional<ControllerSynthesis> controller;
  ClosedLoop loop;
  SimTrace trace;
};

Experiment run_experiment(const ExperimentConfig& config);

/// Column names in CSV order.
std::vector<std::string> trace_columns(const SimTrace& trace);
void write_trace_csv(std::ostream& os, const SimTrace& trace);
/// Parses a CSV written by write_trace_csv for the given dimensions; throws SchemaError.
SimTrace read_trace_csv(std::istream& is, std::size_t m, std::size_t nx, std::size_t nu, std::size_t ny,
                        std::size_t nv);

}  // namespace ftc
