#include "ftc/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "ftc/error.hpp"

namespace ftc {

namespace {

std::size_t snap(double t, double h) {
  if (!(t > 0.0)) return 0;
  if (!std::isfinite(t)) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(std::llround(t / h));
}

}  // namespace

Exogenous SignalSchedule::at(std::size_t k, double frac, double h) const {
  Exogenous w;
  const bool disturbed = k >= snap(disturbance_start, h) && k < snap(disturbance_end, h);
  w.v = disturbed ? disturbance : Vector(disturbance.size(), 0.0);
  w.fs = k >= snap(fault_onset, h) ? fault_magnitude : Vector(fault_magnitude.size(), 0.0);
  double y = 0.0;
  for (const auto& seg : setpoint) {
    if (k < snap(seg.start, h)) break;
    const double since = (static_cast<double>(k) + frac) * h - static_cast<double>(snap(seg.start, h)) * h;
    y = seg.value + seg.slope * since;
  }
  w.y0.assign(ny, y);
  return w;
}

std::vector<std::size_t> SignalSchedule::event_indices(double h, std::size_t steps) const {
  std::vector<std::size_t> out;
  auto add = [&](double t) {
    const std::size_t k = snap(t, h);
    if (k > 0 && k <= steps) out.push_back(k);
  };
  add(disturbance_start);
  add(disturbance_end);
  add(fault_onset);
  for (const auto& seg : setpoint) add(seg.start);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t SignalSchedule::fault_index(double h) const { return snap(fault_onset, h); }

SignalSchedule benchmark_schedule(std::size_t m, std::size_t nv, std::size_t ny) {
  SignalSchedule s;
  s.disturbance.assign(m * nv, 0.1);
  s.fault_magnitude.assign(m * ny, 5.75);
  s.fault_onset = 10.0;
  s.setpoint = {{0.0, 1.0, 0.0}, {20.0, 2.0, 0.0}};
  s.ny = ny;
  return s;
}

std::size_t step_count(double h, double T) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::kValidationError, "sim.h must be positive");
  if (!(T >= h) || !std::isfinite(T)) throw Error(ErrorCode::kValidationError, "sim.T must be at least h");
  return static_cast<std::size_t>(std::llround(T / h));
}

std::vector<Vector> integrate(const std::function<Vector(std::size_t, double, const Vector&)>& rhs,
                              const Vector& s0, double h, double T, double t0) {
  const std::size_t steps = step_count(h, T);
  std::vector<Vector> out;
  out.reserve(steps + 1);
  out.push_back(s0);
  Vector s = s0;
  for (std::size_t k = 0; k < steps; ++k) {
    const Vector k1 = rhs(k, 0.0, s);
    const Vector k2 = rhs(k, 0.5, s + (h / 2) * k1);
    const Vector k3 = rhs(k, 0.5, s + (h / 2) * k2);
    const Vector k4 = rhs(k, 1.0, s + h * k3);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    for (double v : s) {
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "state became non-finite at t=" << t0 + static_cast<double>(k + 1) * h;
        throw Error(ErrorCode::kNonFiniteState, msg.str());
      }
    }
    out.push_back(s);
  }
  return out;
}

Vector sample_initial_state(const ClosedLoop& cl, std::uint64_t seed, double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw Error(ErrorCode::kValidationError, "initial-state bounds must be finite with lo <= hi");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector s(cl.dim(), 0.0);
  for (std::size_t i = 0; i < cl.net.state_dim(); ++i) s[i] = lo == hi ? lo : dist(rng);
  return s;
}

SimTrace simulate(const ClosedLoop& cl, const SignalSchedule& signals, const Vector& s0, const SimOptions& options) {
  const std::size_t steps = step_count(options.h, options.T);
  const double h = options.h;
  const std::size_t n = cl.net.state_dim();
  const std::size_t na = cl.net.augmented_dim();
  const std::size_t ny = cl.net.output_dim();
  const std::size_t base = cl.dim();
  if (s0.size() != base) throw Error(ErrorCode::kDimensionMismatch, "initial state has the wrong size");

  SimTrace tr;
  tr.m = cl.net.m;
  tr.nx = cl.net.nx;
  tr.nu = cl.net.nu;
  tr.ny = cl.net.ny;
  tr.nv = cl.net.nv;
  tr.h = h;
  tr.events = signals.event_indices(h, steps);
  tr.fault_step = signals.fault_index(h);

  // Virtual observer: x_o' uses the true xa' = [x'; 0] between events and jumps by
  // F2 E2 [0; delta f] when the fault steps.
  const Matrix fault_jump = cl.aug.F2 * cl.aug.E2.block(0, n, ny, ny);
  auto rhs = [&](std::size_t k, double frac, const Vector& s) {
    const Exogenous w = signals.at(k, frac, h);
    const std::span<const double> core(s.data(), base);
    Vector d = closed_loop_rhs(cl, core, w);
    if (!options.virtual_observer) return d;
    const LoopSignals sig = loop_signals(cl, core, w);
    const Vector xa_dot = concat({std::span<const double>(d.data(), n), Vector(ny, 0.0)});
    const Vector dv = virtual_observer_derivative(cl.aug, cl.net, cl.obs.gain,
                                                  std::span<const double>(s.data() + base, na), sig.u, sig.y_f,
                                                  xa_dot);
    d.insert(d.end(), dv.begin(), dv.end());
    return d;
  };

  Vector start = s0;
  if (options.virtual_observer) {
    const LoopSignals sig = loop_signals(cl, s0, signals.at(0, 0.0, h));
    start.insert(start.end(), sig.x_o.begin(), sig.x_o.end());
  }

  // Integrate event to event so the impulsive virtual-observer update can be applied.
  std::vector<Vector> states{start};
  states.reserve(steps + 1);
  std::size_t k0 = 0;
  std::vector<std::size_t> cuts = tr.events;
  cuts.push_back(steps);
  for (std::size_t cut : cuts) {
    if (cut <= k0) continue;
    Vector s = states.back();
    if (options.virtual_observer && k0 > 0) {
      const Vector df = signals.at(k0, 0.0, h).fs - signals.at(k0 - 1, 0.0, h).fs;
      const Vector jump = fault_jump * df;
      for (std::size_t i = 0; i < na; ++i) s[base + i] += jump[i];
      states.back() = s;
    }
    const std::size_t offset = k0;
    const auto seg = integrate([&](std::size_t k, double frac, const Vector& x) { return rhs(k + offset, frac, x); },
                               s, h, static_cast<double>(cut - k0) * h, static_cast<double>(k0) * h);
    states.insert(states.end(), seg.begin() + 1, seg.end());
    k0 = cut;
  }

  tr.t.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const Vector& s = states[k];
    const std::span<const double> core(s.data(), base);
    const Exogenous w = signals.at(k, 0.0, h);
    const LoopSignals sig = loop_signals(cl, core, w);
    tr.t.push_back(static_cast<double>(k) * h);
    tr.x.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
    tr.eta.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(n), s.begin() + static_cast<std::ptrdiff_t>(n + na));
    tr.q.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(n + na), s.begin() + static_cast<std::ptrdiff_t>(base));
    tr.x_hat.push_back(sig.x_hat);
    tr.f_hat.push_back(sig.f_hat);
    tr.u.push_back(sig.u);
    tr.y_f.push_back(sig.y_f);
    tr.e.push_back(sig.e);
    tr.v.push_back(w.v);
    tr.fs.push_back(w.fs);
    tr.y0.push_back(w.y0);
    if (options.virtual_observer) tr.x_virtual.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(base), s.end());
  }
  return tr;
}

Experiment run_experiment(const ExperimentConfig& config) {
  for (const auto& a : config.agents) validate_agent(a);
  NetworkModel net = stack_network(config.agents);
  AugmentedModel aug = augment_network(net);
  if (config.graph.m != net.m) throw Error(ErrorCode::kDimensionMismatch, "graph and plant unit counts differ");
  if (!check_source_reachability(config.graph)) {
    throw Error(ErrorCode::kValidationError, "some unit is not reachable from the source");
  }
  if (!is_positive_stable(config.graph.laplacian)) {
    throw Error(ErrorCode::kNotPositiveStable, "augmented Laplacian is not positive stable");
  }

  std::optional<ObserverSynthesis> obs;
  std::optional<ControllerSynthesis> ctl;
  Matrix gain = config.observer_gain ? *config.observer_gain : Matrix{};
  if (!config.observer_gain) {
    obs = synth_observer(aug, net, config.delta, config.synth);
    gain = obs->gain;
  }
  Matrix k = config.feedback_gain ? *config.feedback_gain : Matrix{};
  if (!config.feedback_gain) {
    ctl = synth_controller(net, config.alpha, config.delta, config.synth);
    k = ctl->K;
  }

  ControlLaw law{k, Vector(net.m, config.ell_P), Vector(net.m, config.ell_I), config.graph};
  ClosedLoop loop = make_closed_loop(net, aug, gain, std::move(law));
  const Vector s0 = config.zero_initial_state ? Vector(loop.dim(), 0.0)
                                              : sample_initial_state(loop, config.seed, config.init_low, config.init_high);
  SimTrace trace = simulate(loop, config.signals, s0, config.sim);
  return Experiment{std::move(net), std::move(aug), std::move(obs), std::move(ctl), std::move(loop), std::move(trace)};
}

namespace {

struct ColumnGroup {
  std::string name;
  std::size_t units;
  std::size_t width;
  std::vector<Vector> SimTrace::*field;
};

std::vector<ColumnGroup> column_groups(const SimTrace& tr) {
  const std::size_t m = tr.m;
  return {
      {"x", m, tr.nx, &SimTrace::x},          {"eta", m, tr.nx + tr.ny, &SimTrace::eta},
      {"q", m, tr.ny, &SimTrace::q},          {"xhat", m, tr.nx, &SimTrace::x_hat},
      {"fhat", m, tr.ny, &SimTrace::f_hat},   {"u", m, tr.nu, &SimTrace::u},
      {"yf", m, tr.ny, &SimTrace::y_f},       {"ebar", m, tr.ny, &SimTrace::e},
      {"v", m, tr.nv, &SimTrace::v},          {"fs", m, tr.ny, &SimTrace::fs},
      {"y0", 1, tr.ny, &SimTrace::y0},
  };
}

void append_number(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, res.ptr);
}

}  // namespace

std::vector<std::string> trace_columns(const SimTrace& trace) {
  std::vector<std::string> cols{"t"};
  for (const auto& g : column_groups(trace)) {
    for (std::size_t i = 0; i < g.units; ++i) {
      for (std::size_t k = 0; k < g.width; ++k) {
        std::string name = g.name;
        if (g.units > 1) name += "[" + std::to_string(i + 1) + "]";
        // eta, x, xhat always carry a component index; scalar-per-unit groups drop it.
        if (g.width > 1 || g.name == "x" || g.name == "eta" || g.name == "xhat") {
          name += "[" + std::to_string(k + 1) + "]";
        }
        cols.push_back(std::move(name));
      }
    }
  }
  return cols;
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
  const auto cols = trace_columns(trace);
  std::string line;
  for (std::size_t c = 0; c < cols.size(); ++c) line += (c ? "," : "") + cols[c];
  os << line << '\n';
  const auto groups = column_groups(trace);
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    line.clear();
    append_number(line, trace.t[r]);
    for (const auto& g : groups) {
      for (double v : (trace.*g.field)[r]) {
        line += ',';
        append_number(line, v);
      }
    }
    os << line << '\n';
  }
}

SimTrace read_trace_csv(std::istream& is, std::size_t m, std::size_t nx, std::size_t nu, std::size_t ny,
                        std::size_t nv) {
  SimTrace tr;
  tr.m = m;
  tr.nx = nx;
  tr.nu = nu;
  tr.ny = ny;
  tr.nv = nv;
  const auto expected = trace_columns(tr);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::kSchemaError, "trace is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header != expected) {
    throw Error(ErrorCode::kSchemaError, "trace header has " + std::to_string(header.size()) + " columns, expected " +
                                             std::to_string(expected.size()) + " matching the scenario dimensions");
  }
  const auto groups = column_groups(tr);
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    Vector vals;
    vals.reserve(expected.size());
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{}) throw Error(ErrorCode::kSchemaError, "bad number on trace row " + std::to_string(row));
      vals.push_back(v);
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') throw Error(ErrorCode::kSchemaError, "bad separator on trace row " + std::to_string(row));
      ++p;
    }
    if (vals.size() != expected.size()) {
      throw Error(ErrorCode::kSchemaError, "trace row " + std::to_string(row) + " has " + std::to_string(vals.size()) +
                                               " values, expected " + std::to_string(expected.size()));
    }
    tr.t.push_back(vals[0]);
    std::size_t at = 1;
    for (const auto& g : groups) {
      const std::size_t w = g.units * g.width;
      (tr.*g.field).emplace_back(vals.begin() + static_cast<std::ptrdiff_t>(at),
                                 vals.begin() + static_cast<std::ptrdiff_t>(at + w));
      at += w;
    }
  }
  if (tr.t.size() < 2) throw Error(ErrorCode::kSchemaError, "trace needs at least two rows");
  tr.h = tr.t[1] - tr.t[0];
  return tr;
}

}  // namespace ftc
