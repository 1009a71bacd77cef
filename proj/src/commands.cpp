#include "ftc/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ftc/analysis.hpp"
#include "ftc/estimator.hpp"

namespace ftc {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError:
      return kExitIo;
    case ErrorCode::kInfeasible:
    case ErrorCode::kNotHurwitz:
      return kExitInfeasible;
    case ErrorCode::kNonFiniteState:
    case ErrorCode::kNonFinite:
    case ErrorCode::kSingularMatrix:
    case ErrorCode::kNotSymmetric:
    case ErrorCode::kIdentityCheckFailed:
      return kExitSimulation;
    default:
      return kExitValidation;
  }
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return f;
}

void finish(std::ofstream& f, const fs::path& path) {
  f.flush();
  if (!f) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "cannot create directory " + dir.string());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

const char* yes(bool b) { return b ? "true" : "false"; }

/// gnuplot-style blocks: one two-column (t, value) series per curve, separated by two
/// blank lines, each preceded by a `# name` comment.
void write_plot(const fs::path& path, const SimTrace& tr,
                const std::vector<std::pair<std::string, std::function<double(std::size_t)>>>& curves) {
  std::ofstream f = open_out(path);
  const std::size_t stride = std::max<std::size_t>(1, tr.rows() / 4000);
  bool first = true;
  for (const auto& [name, value] : curves) {
    if (!first) f << "\n\n";
    first = false;
    f << "# " << name << '\n';
    for (std::size_t k = 0; k < tr.rows(); k += stride) f << fmt(tr.t[k]) << ' ' << fmt(value(k)) << '\n';
  }
  finish(f, path);
}

void write_plots(const fs::path& dir, const std::string& suffix, const SimTrace& tr, const NetworkModel& net) {
  std::vector<std::pair<std::string, std::function<double(std::size_t)>>> est, fault, outputs;
  for (std::size_t i = 0; i < tr.m; ++i) {
    const std::string unit = std::to_string(i + 1);
    est.emplace_back("|x_" + unit + " - xhat_" + unit + "|", [&tr, i](std::size_t k) {
      double s = 0.0;
      for (std::size_t c = 0; c < tr.nx; ++c) {
        const double d = tr.x[k][i * tr.nx + c] - tr.x_hat[k][i * tr.nx + c];
        s += d * d;
      }
      return std::sqrt(s);
    });
    fault.emplace_back("fhat_" + unit, [&tr, i](std::size_t k) { return tr.f_hat[k][i * tr.ny]; });
    outputs.emplace_back("y_" + unit, [&tr, &net, i](std::size_t k) {
      double y = 0.0;
      for (std::size_t c = 0; c < tr.nx; ++c) y += net.agents[i].C(0, c) * tr.x[k][i * tr.nx + c];
      return y;
    });
  }
  fault.emplace_back("fs", [&tr](std::size_t k) { return tr.fs[k][0]; });
  outputs.emplace_back("y0", [&tr](std::size_t k) { return tr.y0[k][0]; });
  write_plot(dir / ("plot_estimation_error" + suffix + ".dat"), tr, est);
  write_plot(dir / ("plot_fault_estimate" + suffix + ".dat"), tr, fault);
  write_plot(dir / ("plot_outputs" + suffix + ".dat"), tr, outputs);
}

void print_consensus(std::ostream& os, const std::string& prefix, const ConsensusReport& c) {
  os << prefix << "max_offset=" << fmt(c.max_offset) << '\n';
  os << prefix << "disagreement=" << fmt(c.disagreement) << '\n';
  os << prefix << "max_settling_time=" << fmt(c.max_settling) << '\n';
  for (std::size_t i = 0; i < c.offset.size(); ++i) {
    os << prefix << "unit" << i + 1 << ".offset=" << fmt(c.offset[i]) << '\n';
    os << prefix << "unit" << i + 1 << ".settling_time=" << fmt(c.settling_time[i]) << '\n';
  }
  os << prefix << "final_error_norm=" << fmt(c.final_error_norm) << '\n';
}

template <typename Fn>
int guarded(std::ostream& err, const char* stage, Fn fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << stage << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << stage << ": " << e.what() << '\n';
    return kExitSimulation;
  }
}

}  // namespace

void write_matrix_file(const fs::path& path, const Matrix& m) {
  std::ofstream f = open_out(path);
  f << m.rows() << ' ' << m.cols() << '\n';
  char buf[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      f << (j ? " " : "") << buf;
    }
    f << '\n';
  }
  finish(f, path);
}

Matrix read_matrix_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::size_t rows = 0, cols = 0;
  if (!(f >> rows >> cols)) throw Error(ErrorCode::kSchemaError, path.string() + ": missing 'rows cols' header");
  Vector data(rows * cols);
  for (auto& v : data) {
    if (!(f >> v)) throw Error(ErrorCode::kSchemaError, path.string() + ": expected " + std::to_string(rows * cols) + " values");
  }
  std::string extra;
  if (f >> extra) throw Error(ErrorCode::kSchemaError, path.string() + ": trailing data");
  return Matrix(rows, cols, std::move(data));
}

int cmd_synth(const Scenario& s, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, "synth", [&] {
    const NetworkModel net = stack_network(scenario_agents(s));
    for (const auto& a : net.agents) validate_agent(a);
    const AugmentedModel aug = augment_network(net);
    const SynthOptions opts = scenario_synth_options(s);

    ObserverSynthesis obs;
    try {
      obs = synth_observer(aug, net, s.delta, opts);
    } catch (const Error& e) {
      err << "observer LMI infeasible: " << e.what() << '\n';
      return exit_code_for(e.code());
    }
    ControllerSynthesis ctl;
    try {
      ctl = synth_controller(net, s.alpha, s.delta, opts);
    } catch (const Error& e) {
      err << "controller LMI infeasible: " << e.what() << '\n';
      return exit_code_for(e.code());
    }

    const double reduced = max_eigenvalue(symmetrize(controller_lmi_reduced(net, s.alpha, s.delta, ctl.R, ctl.G)));
    std::ostringstream rep;
    rep << "stage=synth\n";
    rep << "observer.delta=" << fmt(obs.delta) << '\n';
    rep << "observer.margin=" << fmt(obs.margin) << '\n';
    rep << "observer.method=" << obs.method << '\n';
    rep << "observer.P_min_eig=" << fmt(min_eigenvalue(obs.P)) << '\n';
    rep << "observer.hurwitz=" << yes(is_hurwitz(aug.F1 * aug.Aa - obs.gain * aug.E2)) << '\n';
    rep << "controller.alpha=" << fmt(ctl.alpha) << '\n';
    rep << "controller.margin=" << fmt(ctl.margin) << '\n';
    rep << "controller.method=" << ctl.method << '\n';
    rep << "controller.R_min_eig=" << fmt(min_eigenvalue(ctl.R)) << '\n';
    rep << "controller.hurwitz=" << yes(is_hurwitz(net.A + net.B * ctl.K)) << '\n';
    rep << "controller.reduced_lambda_max=" << fmt(reduced) << '\n';
    rep << "controller.gamma=" << fmt(ctl.gamma) << '\n';
    rep << "result=pass\n";

    make_dir(out_dir);
    write_matrix_file(out_dir / kObserverGainFile, obs.gain);
    write_matrix_file(out_dir / kObserverCertificateFile, obs.P);
    write_matrix_file(out_dir / kFeedbackGainFile, ctl.K);
    const fs::path report = out_dir / "synth_report.txt";
    std::ofstream f = open_out(report);
    f << rep.str();
    finish(f, report);
    out << rep.str();
    return static_cast<int>(kExitPass);
  });
}

int cmd_simulate(const Scenario& s, const std::optional<fs::path>& gains_dir, const fs::path& out_dir, bool sweep,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, "simulate", [&] {
    ExperimentConfig base = scenario_experiment(s);
    if (gains_dir) {
      base.observer_gain = read_matrix_file(*gains_dir / kObserverGainFile);
      base.feedback_gain = read_matrix_file(*gains_dir / kFeedbackGainFile);
    } else {
      // Synthesize once; the gains do not depend on the graph.
      const NetworkModel net = stack_network(base.agents);
      const AugmentedModel aug = augment_network(net);
      base.observer_gain = synth_observer(aug, net, base.delta, base.synth).gain;
      base.feedback_gain = synth_controller(net, base.alpha, base.delta, base.synth).K;
    }
    make_dir(out_dir);

    std::vector<std::pair<std::string, std::optional<Topology>>> runs;
    if (sweep) {
      for (const char* name : {"cyclic", "path", "star"}) runs.emplace_back(name, parse_topology(name));
    } else {
      runs.emplace_back(s.topology, std::nullopt);
    }
    std::vector<std::future<Experiment>> jobs;
    for (const auto& [name, topo] : runs) {
      ExperimentConfig cfg = base;
      if (topo) cfg.graph = scenario_graph(s, topo);
      jobs.push_back(std::async(std::launch::async, [cfg = std::move(cfg)] { return run_experiment(cfg); }));
    }
    std::vector<Experiment> results;
    for (auto& j : jobs) results.push_back(j.get());

    std::ostringstream summary;
    summary << "stage=simulate\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const std::string& name = runs[r].first;
      const Experiment& ex = results[r];
      const std::string suffix = sweep ? "_" + name : "";
      const fs::path trace_path = out_dir / ("trace" + suffix + ".csv");
      std::ofstream f = open_out(trace_path);
      write_trace_csv(f, ex.trace);
      finish(f, trace_path);
      write_plots(out_dir, suffix, ex.trace, ex.net);

      const ConsensusReport c = consensus_report(ex.trace, ex.net);
      const std::string prefix = name + ".";
      summary << prefix << "trace=" << trace_path.filename().string() << '\n';
      summary << prefix << "rows=" << ex.trace.rows() << '\n';
      double fault_err = 0.0;
      for (double fh : ex.trace.f_hat.back()) fault_err = std::max(fault_err, std::abs(fh - s.fault_magnitude));
      summary << prefix << "final_fault_estimate_error=" << fmt(fault_err) << '\n';
      print_consensus(summary, prefix, c);
    }
    const fs::path summary_path = out_dir / "summary.txt";
    std::ofstream f = open_out(summary_path);
    f << summary.str();
    finish(f, summary_path);
    out << summary.str();
    return static_cast<int>(kExitPass);
  });
}

int cmd_verify(const Scenario& s, const fs::path& trace_path, const fs::path& gains_dir, std::ostream& out,
               std::ostream& err) {
  return guarded(err, "verify", [&] {
    const ExperimentConfig cfg = scenario_experiment(s);
    const NetworkModel net = stack_network(cfg.agents);
    const AugmentedModel aug = augment_network(net);

    ObserverSynthesis obs;
    obs.delta = s.delta;
    obs.gain = read_matrix_file(gains_dir / kObserverGainFile);
    obs.P = read_matrix_file(gains_dir / kObserverCertificateFile);
    const Matrix K = read_matrix_file(gains_dir / kFeedbackGainFile);
    if (obs.P.rows() != net.augmented_dim() || obs.P.cols() != net.augmented_dim() ||
        obs.gain.rows() != net.augmented_dim() || obs.gain.cols() != net.output_dim() ||
        K.rows() != net.m * net.nu || K.cols() != net.state_dim()) {
      throw Error(ErrorCode::kSchemaError, "gain files do not match the scenario dimensions");
    }

    std::ifstream in(trace_path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot read trace " + trace_path.string());
    SimTrace tr = read_trace_csv(in, net.m, net.nx, net.nu, net.ny, net.nv);
    const std::size_t steps = step_count(s.h, s.T);
    if (tr.rows() != steps + 1 || std::abs(tr.h - s.h) > 1e-9 * s.h) {
      throw Error(ErrorCode::kSchemaError, "trace grid does not match sim.h / sim.T of the scenario");
    }
    tr.h = s.h;
    tr.events = cfg.signals.event_indices(s.h, steps);
    tr.fault_step = cfg.signals.fault_index(s.h);

    const DissipationReport diss = dissipation_check(tr, aug, net, obs);
    const IssCertificate cert = iss_certificate(cfg.graph, net, K, Matrix::identity(net.state_dim()));
    const IssReport iss = verify_iss_bound(tr, cert, cfg.graph, net, K);
    const EquivalenceReport p1 = consensus_equivalence_check(cfg.graph, net.ny, s.seed);
    const ConsensusReport cons = consensus_report(tr, net);

    std::ostringstream rep;
    rep << "stage=verify\n";
    rep << "dissipation.max=" << fmt(diss.max_d) << '\n';
    rep << "dissipation.fd_deviation=" << fmt(diss.fd_deviation) << '\n';
    rep << "dissipation.pass=" << yes(diss.pass) << '\n';
    rep << "iss.c1=" << fmt(cert.c1) << "\niss.c2=" << fmt(cert.c2) << "\niss.c3=" << fmt(cert.c3) << '\n';
    rep << "iss.lyapunov_residual=" << fmt(cert.residual) << '\n';
    rep << "iss.max_violation=" << fmt(iss.max_violation) << '\n';
    rep << "iss.consistency=" << fmt(iss.consistency) << '\n';
    rep << "iss.x0_output_mismatch=" << fmt(iss.x0_output_mismatch) << '\n';
    rep << "iss.pass=" << yes(iss.pass) << '\n';
    rep << "equivalence.forward=" << fmt(p1.forward) << '\n';
    rep << "equivalence.backward=" << fmt(p1.backward) << '\n';
    rep << "equivalence.perturbation=" << fmt(p1.perturbation) << '\n';
    rep << "equivalence.pass=" << yes(p1.pass) << '\n';
    print_consensus(rep, "consensus.", cons);

    const char* failed = !diss.pass ? "dissipation" : !iss.pass ? "iss" : !p1.pass ? "equivalence" : nullptr;
    rep << "result=" << (failed ? "fail" : "pass") << '\n';
    out << rep.str();
    if (failed) {
      err << "verify: certificate '" << failed << "' failed\n";
      return static_cast<int>(kExitCertificate);
    }
    return static_cast<int>(kExitPass);
  });
}

}  // namespace ftc
