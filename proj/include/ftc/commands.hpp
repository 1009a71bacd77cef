#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ftc/error.hpp"
#include "ftc/scenario.hpp"

namespace ftc {

/// 0 pass, 1 I/O, 2 validation, 3 synthesis infeasible, 4 simulation failure,
/// 5 certificate failure.
enum ExitCode : int {
  kExitPass = 0,
  kExitIo = 1,
  kExitValidation = 2,
  kExitInfeasible = 3,
  kExitSimulation = 4,
  kExitCertificate = 5,
};

int exit_code_for(ErrorCode code);

/// Gains file: first line `rows cols`, then one row per line at full precision.
void write_matrix_file(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_file(const std::filesystem::path& path);

inline constexpr const char* kObserverGainFile = "observer_gain.txt";
inline constexpr const char* kObserverCertificateFile = "observer_P.txt";
inline constexpr const char* kFeedbackGainFile = "feedback_gain.txt";

/// Writes the three gain files and synth_report.txt into out_dir.
int cmd_synth(const Scenario& s, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

/// Uses gains from gains_dir when given, otherwise synthesizes. With sweep, runs star,
/// cyclic and path concurrently and writes one trace per topology.
int cmd_simulate(const Scenario& s, const std::optional<std::filesystem::path>& gains_dir,
                 const std::filesystem::path& out_dir, bool sweep, std::ostream& out, std::ostream& err);

/// Dissipation, ISS and consensus-equivalence checks on a trace; consensus metrics are reported
/// but do not gate the exit status.
int cmd_verify(const Scenario& s, const std::filesystem::path& trace_path, const std::filesystem::path& gains_dir,
               std::ostream& out, std::ostream& err);

}  // namespace ftc
