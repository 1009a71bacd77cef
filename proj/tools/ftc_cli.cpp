// Command-line front end: synth, simulate, verify.
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ftc/commands.hpp"

namespace {

std::optional<ftc::Scenario> load(const std::string& path, int& code) {
  try {
    if (path.empty()) return ftc::parse_scenario_text("");
    return ftc::parse_scenario(path);
  } catch (const ftc::Error& e) {
    std::cerr << "scenario: " << e.what() << '\n';
    code = ftc::exit_code_for(e.code());
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative fault-tolerant control: LMI synthesis, closed-loop simulation, certificate checks"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir = ".";
  std::string gains_dir;
  std::string trace;
  bool sweep = false;

  auto* synth = app.add_subcommand("synth", "solve both LMIs and write gain files");
  synth->add_option("-s,--scenario", scenario, "scenario file (defaults to the benchmark)");
  synth->add_option("-o,--out", out_dir, "output directory");

  auto* simulate = app.add_subcommand("simulate", "run the closed loop and write traces");
  simulate->add_option("-s,--scenario", scenario, "scenario file (defaults to the benchmark)");
  simulate->add_option("-g,--gains", gains_dir, "directory with gain files (synthesizes when omitted)");
  simulate->add_option("-o,--out", out_dir, "output directory");
  simulate->add_flag("--sweep", sweep, "run star, cyclic and path concurrently");

  auto* verify = app.add_subcommand("verify", "check certificates on a trace");
  verify->add_option("-s,--scenario", scenario, "scenario file (defaults to the benchmark)");
  verify->add_option("-t,--trace", trace, "trace CSV")->required();
  verify->add_option("-g,--gains", gains_dir, "directory with gain files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ftc::kExitValidation;
  }

  int code = 0;
  const auto s = load(scenario, code);
  if (!s) return code;
  if (*synth) return ftc::cmd_synth(*s, out_dir, std::cout, std::cerr);
  if (*simulate) {
    std::optional<std::filesystem::path> gains;
    if (!gains_dir.empty()) gains = gains_dir;
    return ftc::cmd_simulate(*s, gains, out_dir, sweep, std::cout, std::cerr);
  }
  return ftc::cmd_verify(*s, trace, gains_dir, std::cout, std::cerr);
}
