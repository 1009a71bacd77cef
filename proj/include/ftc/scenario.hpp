#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftc/graph.hpp"
#include "ftc/plant.hpp"
#include "ftc/sim.hpp"

namespace ftc {

inline constexpr int kScenarioSchemaVersion = 1;

/// Scenario file: `key = value` lines, `#` comments, dotted keys. Every key is optional;
/// an empty file gives the DC-motor benchmark on the star graph.
struct Scenario {
  int schema_version = kScenarioSchemaVersion;

  // graph
  std::string topology = "star";  ///< star | cyclic | path | explicit
  std::size_t units = 4;
  std::vector<UnitEdge> edges;      ///< explicit only
  std::vector<SourceLink> sources;  ///< explicit only

  // plant
  std::string plant_model = "dc_motor";  ///< dc_motor | explicit
  DcMotorParams motor;
  std::map<std::size_t, AgentModel> explicit_agents;  ///< 1-based, explicit only

  // synthesis
  double delta = 0.3;
  double alpha = 0.2;
  double margin = 1e-6;
  double pd_margin = 1e-8;
  std::string method = "auto";  ///< auto | ap | barrier
  int ap_iterations = 6000;
  int barrier_iterations = 600;
  bool per_agent = true;

  // control
  double ell_P = 90.0;
  double ell_I = 0.1;
  std::vector<SetpointSegment> setpoint{{0.0, 1.0, 0.0}, {20.0, 2.0, 0.0}};

  // simulation
  double h = 1e-3;
  double T = 40.0;
  std::uint64_t seed = 1;
  double init_low = -1.0;
  double init_high = 1.0;
  double fault_magnitude = 5.75;
  double fault_onset = 10.0;
  double disturbance = 0.1;
  double disturbance_end = std::numeric_limits<double>::infinity();
};

/// Throws ParseError (with line number) or ValidationError (naming the field).
Scenario parse_scenario_text(const std::string& text);
/// Throws IoError when the file cannot be read.
Scenario parse_scenario(const std::filesystem::path& path);
/// Cross-field checks; throws ValidationError.
void validate_scenario(const Scenario& s);

NetworkGraph scenario_graph(const Scenario& s, std::optional<Topology> override_topology = std::nullopt);
std::vector<AgentModel> scenario_agents(const Scenario& s);
SignalSchedule scenario_signals(const Scenario& s, std::size_t m, std::size_t nv, std::size_t ny);
SynthOptions scenario_synth_options(const Scenario& s);
ExperimentConfig scenario_experiment(const Scenario& s, std::optional<Topology> override_topology = std::nullopt);

}  // namespace ftc
