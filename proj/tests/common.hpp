#pragma once

#include <random>

#include "ftc/analysis.hpp"
#include "ftc/error.hpp"
#include "ftc/scenario.hpp"

namespace ftc::testing {

inline std::vector<AgentModel> motors(std::size_t m = 4) {
  std::vector<AgentModel> out;
  for (std::size_t i = 1; i <= m; ++i) out.push_back(dc_motor_agent(i));
  return out;
}

/// Gains synthesized once per test binary.
struct Gains {
  NetworkModel net;
  AugmentedModel aug;
  ObserverSynthesis observer;
  ControllerSynthesis controller;
};

inline const Gains& benchmark_gains() {
  static const Gains g = [] {
    Gains out;
    out.net = stack_network(motors());
    out.aug = augment_network(out.net);
    out.observer = synth_observer(out.aug, out.net, 0.3);
    out.controller = synth_controller(out.net, 0.2, 0.3);
    return out;
  }();
  return g;
}

inline ExperimentConfig benchmark_config(Topology topo = Topology::kStar) {
  ExperimentConfig c = scenario_experiment(Scenario{}, topo);
  c.observer_gain = benchmark_gains().observer.gain;
  c.feedback_gain = benchmark_gains().controller.K;
  return c;
}

inline ExperimentConfig clean_config(Topology topo = Topology::kStar) {
  ExperimentConfig c = benchmark_config(topo);
  c.signals.disturbance.assign(c.signals.disturbance.size(), 0.0);
  c.signals.fault_magnitude.assign(c.signals.fault_magnitude.size(), 0.0);
  return c;
}

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix out(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) = u(rng);
  return out;
}

inline Vector random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

/// 2x2 Hurwitz test from the characteristic polynomial: trace < 0 and det > 0.
inline bool hurwitz_2x2(const Matrix& a) {
  return a(0, 0) + a(1, 1) < 0.0 && a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) > 0.0;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).max_abs(); }

}  // namespace ftc::testing
