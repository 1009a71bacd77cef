#include "ftc/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ftc/error.hpp"

namespace ftc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(s);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  return out;
}

class LineError {
 public:
  LineError(std::size_t line, std::string key) : line_(line), key_(std::move(key)) {}
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_) + ": " + key_ + ": " + what);
  }

 private:
  std::size_t line_;
  std::string key_;
};

double to_double(const std::string& text, const LineError& at) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end) at.fail("expected a number, got '" + text + "'");
  return v;
}

std::uint64_t to_unsigned(const std::string& text, const LineError& at) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != end) at.fail("expected a non-negative integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& text, const LineError& at) {
  if (text == "true") return true;
  if (text == "false") return false;
  at.fail("expected true or false, got '" + text + "'");
}

Matrix to_matrix(const std::string& text, const LineError& at) {
  std::vector<Vector> rows;
  for (const auto& row : split(text, ';')) {
    Vector r;
    std::string cleaned = row;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::stringstream ss(cleaned);
    std::string tok;
    while (ss >> tok) r.push_back(to_double(tok, at));
    if (r.empty()) at.fail("empty matrix row");
    if (!rows.empty() && r.size() != rows.front().size()) at.fail("matrix rows differ in length");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) at.fail("empty matrix");
  Vector flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  try {
    return Matrix(rows.size(), rows.front().size(), std::move(flat));
  } catch (const Error& e) {
    at.fail(e.what());
  }
}

std::vector<std::string> list_items(const std::string& text) {
  std::vector<std::string> out;
  for (auto& item : split(text, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  Scenario s;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;

  using Setter = std::function<void(const std::string&, const LineError&)>;
  const std::map<std::string, Setter> setters = {
      {"schema_version", [&](const std::string& v, const LineError& at) { s.schema_version = static_cast<int>(to_unsigned(v, at)); }},
      {"graph.topology", [&](const std::string& v, const LineError&) { s.topology = v; }},
      {"graph.units", [&](const std::string& v, const LineError& at) { s.units = to_unsigned(v, at); }},
      {"graph.edges",
       [&](const std::string& v, const LineError& at) {
         for (const auto& item : list_items(v)) {
           const auto arrow = item.find("<-");
           const auto colon = item.find(':');
           if (arrow == std::string::npos || colon == std::string::npos || colon < arrow) {
             at.fail("edge '" + item + "' must look like to<-from:weight");
           }
           s.edges.push_back({to_unsigned(trim(item.substr(0, arrow)), at),
                              to_unsigned(trim(item.substr(arrow + 2, colon - arrow - 2)), at),
                              to_double(trim(item.substr(colon + 1)), at)});
         }
       }},
      {"graph.sources",
       [&](const std::string& v, const LineError& at) {
         for (const auto& item : list_items(v)) {
           const auto parts = split(item, ':');
           if (parts.size() != 2) at.fail("source '" + item + "' must look like unit:weight");
           s.sources.push_back({to_unsigned(parts[0], at), to_double(parts[1], at)});
         }
       }},
      {"plant.model", [&](const std::string& v, const LineError&) { s.plant_model = v; }},
      {"plant.dc_motor.J", [&](const std::string& v, const LineError& at) { s.motor.J = to_double(v, at); }},
      {"plant.dc_motor.b", [&](const std::string& v, const LineError& at) { s.motor.b0 = to_double(v, at); }},
      {"plant.dc_motor.M", [&](const std::string& v, const LineError& at) { s.motor.M0 = to_double(v, at); }},
      {"plant.dc_motor.R", [&](const std::string& v, const LineError& at) { s.motor.R0 = to_double(v, at); }},
      {"plant.dc_motor.L", [&](const std::string& v, const LineError& at) { s.motor.L0 = to_double(v, at); }},
      {"plant.dc_motor.sigma", [&](const std::string& v, const LineError& at) { s.motor.sigma0 = to_double(v, at); }},
      {"synth.delta", [&](const std::string& v, const LineError& at) { s.delta = to_double(v, at); }},
      {"synth.alpha", [&](const std::string& v, const LineError& at) { s.alpha = to_double(v, at); }},
      {"synth.margin", [&](const std::string& v, const LineError& at) { s.margin = to_double(v, at); }},
      {"synth.pd_margin", [&](const std::string& v, const LineError& at) { s.pd_margin = to_double(v, at); }},
      {"synth.method", [&](const std::string& v, const LineError&) { s.method = v; }},
      {"synth.ap_iterations", [&](const std::string& v, const LineError& at) { s.ap_iterations = static_cast<int>(to_unsigned(v, at)); }},
      {"synth.barrier_iterations", [&](const std::string& v, const LineError& at) { s.barrier_iterations = static_cast<int>(to_unsigned(v, at)); }},
      {"synth.per_agent", [&](const std::string& v, const LineError& at) { s.per_agent = to_bool(v, at); }},
      {"control.ell_P", [&](const std::string& v, const LineError& at) { s.ell_P = to_double(v, at); }},
      {"control.ell_I", [&](const std::string& v, const LineError& at) { s.ell_I = to_double(v, at); }},
      {"control.setpoint",
       [&](const std::string& v, const LineError& at) {
         s.setpoint.clear();
         for (const auto& item : list_items(v)) {
           const auto parts = split(item, ':');
           if (parts.size() != 2 && parts.size() != 3) at.fail("segment '" + item + "' must look like start:value[:slope]");
           s.setpoint.push_back({to_double(parts[0], at), to_double(parts[1], at),
                                 parts.size() == 3 ? to_double(parts[2], at) : 0.0});
         }
       }},
      {"sim.h", [&](const std::string& v, const LineError& at) { s.h = to_double(v, at); }},
      {"sim.T", [&](const std::string& v, const LineError& at) { s.T = to_double(v, at); }},
      {"sim.seed", [&](const std::string& v, const LineError& at) { s.seed = to_unsigned(v, at); }},
      {"sim.init_low", [&](const std::string& v, const LineError& at) { s.init_low = to_double(v, at); }},
      {"sim.init_high", [&](const std::string& v, const LineError& at) { s.init_high = to_double(v, at); }},
      {"sim.fault_magnitude", [&](const std::string& v, const LineError& at) { s.fault_magnitude = to_double(v, at); }},
      {"sim.fault_onset", [&](const std::string& v, const LineError& at) { s.fault_onset = to_double(v, at); }},
      {"sim.disturbance", [&](const std::string& v, const LineError& at) { s.disturbance = to_double(v, at); }},
      {"sim.disturbance_end", [&](const std::string& v, const LineError& at) { s.disturbance_end = to_double(v, at); }},
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const LineError at(line_no, key);
    if (key.empty()) at.fail("missing key");
    if (!seen.insert(key).second) at.fail("duplicate key");

    if (auto it = setters.find(key); it != setters.end()) {
      it->second(value, at);
      continue;
    }
    // plant.agent.<i>.<A|B|C|D>
    const auto parts = split(key, '.');
    if (parts.size() == 4 && parts[0] == "plant" && parts[1] == "agent" && parts[3].size() == 1 &&
        std::string("ABCD").find(parts[3][0]) != std::string::npos) {
      const std::size_t i = to_unsigned(parts[2], at);
      if (i == 0) at.fail("agent indices start at 1");
      AgentModel& a = s.explicit_agents[i];
      Matrix m = to_matrix(value, at);
      switch (parts[3][0]) {
        case 'A': a.A = std::move(m); break;
        case 'B': a.B = std::move(m); break;
        case 'C': a.C = std::move(m); break;
        default: a.D = std::move(m); break;
      }
      continue;
    }
    at.fail("unknown key");
  }
  validate_scenario(s);
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot read scenario file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario_text(ss.str());
}

void validate_scenario(const Scenario& s) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::kValidationError, field + ": " + why);
  };
  if (s.schema_version != kScenarioSchemaVersion) {
    bad("schema_version", "unsupported version " + std::to_string(s.schema_version));
  }
  if (s.topology != "explicit") {
    try {
      parse_topology(s.topology);
    } catch (const Error&) {
      bad("graph.topology", "unknown topology '" + s.topology + "' (star, cyclic, path, explicit)");
    }
    if (!s.edges.empty() || !s.sources.empty()) bad("graph.edges", "only allowed with graph.topology = explicit");
    if (s.topology == "cyclic" && s.units < 3) bad("graph.units", "cyclic topology needs at least 3 units");
  } else if (s.sources.empty()) {
    bad("graph.sources", "explicit graph needs at least one source link");
  }
  if (s.units == 0) bad("graph.units", "must be at least 1");

  if (s.plant_model == "explicit") {
    if (s.explicit_agents.size() != s.units) bad("plant.agent", "need one explicit agent per unit");
    for (std::size_t i = 1; i <= s.units; ++i) {
      const auto it = s.explicit_agents.find(i);
      if (it == s.explicit_agents.end()) bad("plant.agent." + std::to_string(i), "missing");
      const AgentModel& a = it->second;
      if (a.A.empty() || a.B.empty() || a.C.empty() || a.D.empty()) {
        bad("plant.agent." + std::to_string(i), "needs A, B, C and D");
      }
    }
  } else if (s.plant_model == "dc_motor") {
    if (!s.explicit_agents.empty()) bad("plant.agent", "only allowed with plant.model = explicit");
    for (double p : {s.motor.J, s.motor.b0, s.motor.M0, s.motor.R0, s.motor.L0, s.motor.sigma0}) {
      if (!std::isfinite(p)) bad("plant.dc_motor", "parameters must be finite");
    }
    if (!(s.motor.J > 0.0) || !(s.motor.L0 > 0.0)) bad("plant.dc_motor", "J and L must be positive");
  } else {
    bad("plant.model", "unknown model '" + s.plant_model + "' (dc_motor, explicit)");
  }

  if (s.method != "auto" && s.method != "ap" && s.method != "barrier") {
    bad("synth.method", "unknown method '" + s.method + "' (auto, ap, barrier)");
  }
  if (!(s.margin > 0.0) || !std::isfinite(s.margin)) bad("synth.margin", "must be positive");
  if (!(s.pd_margin > 0.0) || !std::isfinite(s.pd_margin)) bad("synth.pd_margin", "must be positive");
  if (!std::isfinite(s.delta)) bad("synth.delta", "must be finite");
  if (!std::isfinite(s.alpha)) bad("synth.alpha", "must be finite");
  if (!std::isfinite(s.ell_P)) bad("control.ell_P", "must be finite");
  if (!std::isfinite(s.ell_I)) bad("control.ell_I", "must be finite");
  if (s.setpoint.empty() || s.setpoint.front().start != 0.0) bad("control.setpoint", "first segment must start at 0");
  for (std::size_t i = 0; i < s.setpoint.size(); ++i) {
    const auto& seg = s.setpoint[i];
    if (!std::isfinite(seg.start) || !std::isfinite(seg.value) || !std::isfinite(seg.slope)) {
      bad("control.setpoint", "segment values must be finite");
    }
    if (i > 0 && !(seg.start > s.setpoint[i - 1].start)) bad("control.setpoint", "segment starts must increase");
  }
  if (!(s.h > 0.0) || !std::isfinite(s.h)) bad("sim.h", "must be positive");
  if (!(s.T >= s.h) || !std::isfinite(s.T)) bad("sim.T", "must be finite and at least sim.h");
  if (!std::isfinite(s.init_low) || !std::isfinite(s.init_high) || s.init_low > s.init_high) {
    bad("sim.init_low", "initial-state bounds must be finite with init_low <= init_high");
  }
  if (!std::isfinite(s.fault_magnitude)) bad("sim.fault_magnitude", "must be finite");
  if (!(s.fault_onset >= 0.0)) bad("sim.fault_onset", "must be non-negative");
  if (!std::isfinite(s.disturbance)) bad("sim.disturbance", "must be finite");
  if (!(s.disturbance_end >= 0.0)) bad("sim.disturbance_end", "must be non-negative");
}

NetworkGraph scenario_graph(const Scenario& s, std::optional<Topology> override_topology) {
  if (override_topology) return normalize_weights(named_topology(*override_topology, s.units));
  if (s.topology == "explicit") return normalize_weights(build_graph(s.units, s.edges, s.sources));
  return normalize_weights(named_topology(parse_topology(s.topology), s.units));
}

std::vector<AgentModel> scenario_agents(const Scenario& s) {
  std::vector<AgentModel> out;
  for (std::size_t i = 1; i <= s.units; ++i) {
    if (s.plant_model == "explicit") {
      AgentModel a = s.explicit_agents.at(i);
      a.F = Matrix::identity(a.C.rows());
      out.push_back(std::move(a));
    } else {
      out.push_back(dc_motor_agent(i, s.motor));
    }
  }
  return out;
}

SignalSchedule scenario_signals(const Scenario& s, std::size_t m, std::size_t nv, std::size_t ny) {
  SignalSchedule sig;
  sig.disturbance.assign(m * nv, s.disturbance);
  sig.disturbance_end = s.disturbance_end;
  sig.fault_magnitude.assign(m * ny, s.fault_magnitude);
  sig.fault_onset = s.fault_onset;
  sig.setpoint = s.setpoint;
  sig.ny = ny;
  return sig;
}

SynthOptions scenario_synth_options(const Scenario& s) {
  SynthOptions o;
  o.margin = s.margin;
  o.pd_margin = s.pd_margin;
  o.per_agent = s.per_agent;
  o.lmi.ap_iterations = s.ap_iterations;
  o.lmi.barrier_iterations = s.barrier_iterations;
  o.lmi.method = s.method == "ap"        ? LmiMethod::kAlternatingProjections
                 : s.method == "barrier" ? LmiMethod::kBarrier
                                         : LmiMethod::kAuto;
  return o;
}

ExperimentConfig scenario_experiment(const Scenario& s, std::optional<Topology> override_topology) {
  ExperimentConfig c;
  c.graph = scenario_graph(s, override_topology);
  c.agents = scenario_agents(s);
  const std::size_t nv = c.agents.front().nv();
  const std::size_t ny = c.agents.front().ny();
  c.delta = s.delta;
  c.alpha = s.alpha;
  c.synth = scenario_synth_options(s);
  c.ell_P = s.ell_P;
  c.ell_I = s.ell_I;
  c.signals = scenario_signals(s, s.units, nv, ny);
  c.sim.h = s.h;
  c.sim.T = s.T;
  c.seed = s.seed;
  c.init_low = s.init_low;
  c.init_high = s.init_high;
  return c;
}

}  // namespace ftc
