#include "ftc/estimator.hpp"

#include "ftc/error.hpp"

namespace ftc {

namespace {

void require_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n));
  }
}

}  // namespace

ObserverRealization build_observer(const AugmentedModel& aug, const NetworkModel& net, const Matrix& gain) {
  if (gain.rows() != net.augmented_dim() || gain.cols() != net.output_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "observer gain has the wrong shape");
  }
  ObserverRealization obs;
  obs.A_obs = aug.F1 * aug.Aa - gain * aug.E2;
  if (!is_hurwitz(obs.A_obs)) throw Error(ErrorCode::kNotHurwitz, "F1 Aa - L E2 is not Hurwitz");
  obs.B_u = aug.F1 * net.B;
  obs.B_y = obs.A_obs * aug.F2 + gain;
  obs.F2 = aug.F2;
  obs.gain = gain;
  obs.nx_total = net.state_dim();
  obs.ny_total = net.output_dim();
  return obs;
}

ObserverRealization build_observer(const AugmentedModel& aug, const NetworkModel& net,
                                   const ObserverSynthesis& synth) {
  return build_observer(aug, net, synth.gain);
}

Vector observer_derivative(const ObserverRealization& obs, std::span<const double> eta,
                           std::span<const double> y_f, std::span<const double> u) {
  require_size(eta, obs.dim(), "eta");
  require_size(y_f, obs.B_y.cols(), "y_f");
  require_size(u, obs.B_u.cols(), "u");
  Vector d = obs.A_obs * eta;
  const Vector bu = obs.B_u * u;
  const Vector by = obs.B_y * y_f;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += bu[i] + by[i];
  return d;
}

EstimateSplit extract_estimates(const ObserverRealization& obs, std::span<const double> eta,
                                std::span<const double> y_f) {
  require_size(eta, obs.dim(), "eta");
  require_size(y_f, obs.ny_total, "y_f");
  const Vector x_o = Vector(eta.begin(), eta.end()) + obs.F2 * y_f;
  EstimateSplit out;
  out.x_hat.assign(x_o.begin(), x_o.begin() + static_cast<std::ptrdiff_t>(obs.nx_total));
  out.f_hat.assign(x_o.begin() + static_cast<std::ptrdiff_t>(obs.nx_total), x_o.end());
  return out;
}

Vector virtual_observer_derivative(const AugmentedModel& aug, const NetworkModel& net, const Matrix& gain,
                                   std::span<const double> x_o, std::span<const double> u,
                                   std::span<const double> y_f, std::span<const double> xa_dot) {
  const std::size_t na = net.augmented_dim();
  require_size(x_o, na, "x_o");
  require_size(u, net.B.cols(), "u");
  require_size(y_f, net.output_dim(), "y_f");
  require_size(xa_dot, na, "xa_dot");
  const Vector innovation = Vector(y_f.begin(), y_f.end()) - aug.E2 * x_o;
  return aug.F1 * (aug.Aa * x_o) + aug.F1 * (net.B * u) + aug.F2 * (aug.E2 * xa_dot) + gain * innovation;
}

OracleTrace virtual_observer_oracle(const AugmentedModel& aug, const NetworkModel& net, const Matrix& gain,
                                    std::span<const double> x0, std::span<const double> x_o0, double h,
                                    std::size_t steps, const std::function<OracleSignals(double)>& signals) {
  const std::size_t n = net.state_dim();
  const std::size_t na = net.augmented_dim();
  require_size(x0, n, "x0");
  require_size(x_o0, na, "x_o0");
  const ObserverRealization obs = build_observer(aug, net, gain);

  // State layout [x; x_o virtual; eta].
  auto rhs = [&](double t, const Vector& s) {
    const OracleSignals sig = signals(t);
    const std::span<const double> x(s.data(), n);
    const std::span<const double> xo(s.data() + n, na);
    const std::span<const double> eta(s.data() + n + na, na);
    const Vector xdot = net.A * x + net.B * sig.u + net.D * sig.v;
    const Vector y_f = net.C * x + net.F * sig.fs;
    const Vector xa_dot = concat({xdot, sig.fs_dot});
    return concat({xdot, virtual_observer_derivative(aug, net, gain, xo, sig.u, y_f, xa_dot),
                   observer_derivative(obs, eta, y_f, sig.u)});
  };
  auto realized = [&](double t, const Vector& s) {
    const OracleSignals sig = signals(t);
    const std::span<const double> x(s.data(), n);
    const Vector y_f = net.C * x + net.F * sig.fs;
    const std::span<const double> eta(s.data() + n + na, na);
    const EstimateSplit e = extract_estimates(obs, eta, y_f);
    return concat({e.x_hat, e.f_hat});
  };

  const OracleSignals sig0 = signals(0.0);
  const Vector xa0 = concat({x0, sig0.fs});
  const Vector eta0 = Vector(x_o0.begin(), x_o0.end()) - aug.F2 * (aug.E2 * xa0);
  Vector s = concat({x0, x_o0, eta0});

  OracleTrace out;
  auto record = [&](double t) {
    out.x.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
    out.x_virtual.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(n),
                               s.begin() + static_cast<std::ptrdiff_t>(n + na));
    out.x_realized.push_back(realized(t, s));
  };
  record(0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const Vector k1 = rhs(t, s);
    const Vector k2 = rhs(t + h / 2, s + (h / 2) * k1);
    const Vector k3 = rhs(t + h / 2, s + (h / 2) * k2);
    const Vector k4 = rhs(t + h, s + h * k3);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    record(static_cast<double>(k + 1) * h);
  }
  return out;
}

}  // namespace ftc
