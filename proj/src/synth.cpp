#include "ftc/synth.hpp"

#include <cmath>
#include <future>
#include <sstream>

#include "ftc/error.hpp"

namespace ftc {

Matrix observer_lmi(const AugmentedModel& aug, const NetworkModel& net, double delta,
                    const Matrix& P, const Matrix& H) {
  const std::size_t na = aug.Aa.cols();
  const Matrix pfa = P * aug.F1 * aug.Aa;
  const Matrix he = H * aug.E2;
  const Matrix top = pfa + pfa.transpose() - he - he.transpose() + Matrix::identity(na);
  const Matrix coupling = P * aug.F1 * net.D;
  return vcat({hcat({top, coupling}),
               hcat({coupling.transpose(), -(delta * delta) * Matrix::identity(net.D.cols())})});
}

Matrix controller_lmi(const NetworkModel& net, double alpha, double delta, const Matrix& R,
                      const Matrix& G) {
  const std::size_t n = net.A.rows();
  const std::size_t nu = net.B.cols();
  const std::size_t nv = net.D.cols();
  const Matrix ar = net.A * R;
  const Matrix bg = net.B * G;
  const Matrix dbar = ar + ar.transpose() + bg + bg.transpose();
  return vcat({
      hcat({dbar, R, -net.B, net.D}),
      hcat({R, -Matrix::identity(n), Matrix(n, nu), Matrix(n, nv)}),
      hcat({-net.B.transpose(), Matrix(nu, n), -alpha * Matrix::identity(nu), Matrix(nu, nv)}),
      hcat({net.D.transpose(), Matrix(nv, n), Matrix(nv, nu), -(delta * delta) * Matrix::identity(nv)}),
  });
}

Matrix controller_lmi_reduced(const NetworkModel& net, double alpha, double delta, const Matrix& R,
                              const Matrix& G) {
  const std::size_t nu = net.B.cols();
  const std::size_t nv = net.D.cols();
  const Matrix ar = net.A * R;
  const Matrix bg = net.B * G;
  const Matrix dtilde = ar + ar.transpose() + bg + bg.transpose() + R * R;
  return vcat({
      hcat({dtilde, -net.B, net.D}),
      hcat({-net.B.transpose(), -alpha * Matrix::identity(nu), Matrix(nu, nv)}),
      hcat({net.D.transpose(), Matrix(nv, nu), -(delta * delta) * Matrix::identity(nv)}),
  });
}

Matrix controller_lmi_qk(const NetworkModel& net, double alpha, double delta, const Matrix& Q,
                         const Matrix& K) {
  const std::size_t n = net.A.rows();
  const std::size_t nu = net.B.cols();
  const std::size_t nv = net.D.cols();
  const Matrix qa = Q * (net.A + net.B * K);
  const Matrix qb = Q * net.B;
  const Matrix qd = Q * net.D;
  return vcat({
      hcat({qa + qa.transpose() + Matrix::identity(n), -qb, qd}),
      hcat({-qb.transpose(), -alpha * Matrix::identity(nu), Matrix(nu, nv)}),
      hcat({qd.transpose(), Matrix(nv, nu), -(delta * delta) * Matrix::identity(nv)}),
  });
}

double gamma_bound(const Matrix& K, double alpha, double delta) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::kAlphaNonPositive, "alpha must be positive");
  if (!(delta > 0.0)) throw Error(ErrorCode::kDeltaNonPositive, "delta must be positive");
  const double lmax = K.empty() ? 0.0 : std::max(0.0, max_eigenvalue(symmetrize(K.transpose() * K)));
  return std::sqrt(alpha * lmax + 1.0) * delta;
}

namespace {

template <typename Fn>
auto map_units(std::size_t m, bool concurrent, Fn fn) {
  using Result = decltype(fn(std::size_t{0}));
  std::vector<Result> out;
  if (!concurrent || m == 1) {
    for (std::size_t i = 0; i < m; ++i) out.push_back(fn(i));
    return out;
  }
  std::vector<std::future<Result>> jobs;
  for (std::size_t i = 0; i < m; ++i) jobs.push_back(std::async(std::launch::async, fn, i));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::string delta_text(double delta) {
  std::ostringstream s;
  s << delta;
  return s.str();
}

LmiSolution solve_observer_lmi(const AugmentedModel& aug, const NetworkModel& net, double delta,
                               const SynthOptions& options) {
  const std::size_t na = aug.Aa.cols();
  LmiProblem problem;
  problem.variables = {{"P", VariableKind::kSymmetricPositive, na, na},
                       {"H", VariableKind::kRectangular, na, aug.E2.rows()}};
  problem.expression = [&](std::span<const Matrix> v) {
    return observer_lmi(aug, net, delta, v[0], v[1]);
  };
  problem.margin = options.margin;
  problem.pd_margin = options.pd_margin;
  return solve_lmi(problem, options.lmi);
}

LmiSolution solve_controller_lmi(const NetworkModel& net, double alpha, double delta,
                                 const SynthOptions& options) {
  const std::size_t n = net.A.rows();
  LmiProblem problem;
  problem.variables = {{"R", VariableKind::kSymmetricPositive, n, n},
                       {"G", VariableKind::kRectangular, net.B.cols(), n}};
  problem.expression = [&](std::span<const Matrix> v) {
    return controller_lmi(net, alpha, delta, v[0], v[1]);
  };
  problem.margin = options.margin;
  problem.pd_margin = options.pd_margin;
  return solve_lmi(problem, options.lmi);
}

std::string join_methods(const std::vector<LmiSolution>& sols) {
  std::string out;
  for (const auto& s : sols) {
    const std::string m = to_string(s.method);
    if (out.find(m) == std::string::npos) out += (out.empty() ? "" : "+") + m;
  }
  return out;
}

}  // namespace

ObserverSynthesis synth_observer(const AugmentedModel& aug, const NetworkModel& net, double delta,
                                 const SynthOptions& options) {
  if (!(delta > 0.0)) throw Error(ErrorCode::kDeltaNonPositive, "delta must be positive");
  const std::size_t na = net.augmented_dim();
  ObserverSynthesis out;
  out.delta = delta;
  out.P = Matrix(na, na);
  out.H = Matrix(na, net.output_dim());

  std::vector<LmiSolution> sols;
  try {
    if (options.per_agent) {
      sols = map_units(net.m, options.concurrent, [&](std::size_t i) {
        const NetworkModel unit = stack_network({net.agents[i]});
        const AugmentedModel unit_aug = augment_network(unit);
        return solve_observer_lmi(unit_aug, unit, delta, options);
      });
      for (std::size_t i = 0; i < net.m; ++i) {
        const auto idx = augmented_indices(net, i);
        for (std::size_t a = 0; a < idx.size(); ++a) {
          for (std::size_t b = 0; b < idx.size(); ++b) out.P(idx[a], idx[b]) = sols[i].values[0](a, b);
          for (std::size_t k = 0; k < net.ny; ++k) out.H(idx[a], i * net.ny + k) = sols[i].values[1](a, k);
        }
      }
    } else {
      sols.push_back(solve_observer_lmi(aug, net, delta, options));
      out.P = sols[0].values[0];
      out.H = sols[0].values[1];
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInfeasible) throw;
    throw Error(ErrorCode::kInfeasible,
                "observer LMI infeasible at delta=" + delta_text(delta) + ": " + e.what());
  }
  out.method = join_methods(sols);

  const double lmax = max_eigenvalue(symmetrize(observer_lmi(aug, net, delta, out.P, out.H)));
  if (lmax > -options.margin || min_eigenvalue(out.P) < options.pd_margin) {
    throw Error(ErrorCode::kInfeasible, "assembled observer certificate failed re-verification at delta=" +
                                            delta_text(delta));
  }
  out.margin = -lmax;
  out.gain = solve_linear(out.P, out.H);
  if ((out.P * out.gain - out.H).max_abs() > 1e-9 * std::max(1.0, out.H.max_abs())) {
    throw Error(ErrorCode::kSingularMatrix, "P L = H not satisfied to 1e-9");
  }
  if (!is_hurwitz(aug.F1 * aug.Aa - out.gain * aug.E2)) {
    throw Error(ErrorCode::kNotHurwitz, "F1 Aa - L E2 is not Hurwitz");
  }
  return out;
}

ControllerSynthesis synth_controller(const NetworkModel& net, double alpha, double delta,
                                     const SynthOptions& options) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::kAlphaNonPositive, "alpha must be positive");
  if (!(delta > 0.0)) throw Error(ErrorCode::kDeltaNonPositive, "delta must be positive");
  const std::size_t n = net.state_dim();
  ControllerSynthesis out;
  out.alpha = alpha;
  out.delta = delta;
  out.R = Matrix(n, n);
  out.G = Matrix(net.m * net.nu, n);

  std::vector<LmiSolution> sols;
  try {
    if (options.per_agent) {
      sols = map_units(net.m, options.concurrent, [&](std::size_t i) {
        return solve_controller_lmi(stack_network({net.agents[i]}), alpha, delta, options);
      });
      for (std::size_t i = 0; i < net.m; ++i) {
        out.R.set_block(i * net.nx, i * net.nx, sols[i].values[0]);
        out.G.set_block(i * net.nu, i * net.nx, sols[i].values[1]);
      }
    } else {
      sols.push_back(solve_controller_lmi(net, alpha, delta, options));
      out.R = sols[0].values[0];
      out.G = sols[0].values[1];
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInfeasible) throw;
    throw Error(ErrorCode::kInfeasible, "controller LMI infeasible at alpha=" + delta_text(alpha) +
                                            ", delta=" + delta_text(delta) + ": " + e.what());
  }
  out.method = join_methods(sols);

  const double lmax = max_eigenvalue(symmetrize(controller_lmi(net, alpha, delta, out.R, out.G)));
  if (lmax > -options.margin || min_eigenvalue(out.R) < options.pd_margin) {
    throw Error(ErrorCode::kInfeasible, "assembled controller certificate failed re-verification");
  }
  out.margin = -lmax;
  // K = G R^-1  <=>  R K' = G'
  out.K = solve_linear(out.R, out.G.transpose()).transpose();
  if ((out.K * out.R - out.G).max_abs() > 1e-9 * std::max(1.0, out.G.max_abs())) {
    throw Error(ErrorCode::kSingularMatrix, "K R = G not satisfied to 1e-9");
  }
  if (!is_hurwitz(net.A + net.B * out.K)) {
    throw Error(ErrorCode::kNotHurwitz, "A + B K is not Hurwitz");
  }
  const Matrix q = symmetrize(inverse(out.R));
  if (!(max_eigenvalue(symmetrize(controller_lmi_qk(net, alpha, delta, q, out.K))) < 0.0)) {
    throw Error(ErrorCode::kInfeasible, "dissipation form in (Q, K) is not negative definite");
  }
  out.gamma = gamma_bound(out.K, alpha, delta);
  return out;
}

}  // namespace ftc
