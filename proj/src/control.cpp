#include "ftc/control.hpp"

#include <cmath>

#include "ftc/error.hpp"

namespace ftc {

namespace {

std::size_t output_width(const NetworkGraph& g, std::span<const double> y_hat, std::span<const double> y0) {
  if (g.m == 0 || y0.empty() || y_hat.size() != g.m * y0.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "y_hat must hold m * ny entries for ny = y0.size()");
  }
  return y0.size();
}

}  // namespace

Vector in_neighbor_setpoint(const NetworkGraph& g, std::span<const double> y_hat, std::span<const double> y0) {
  const std::size_t ny = output_width(g, y_hat, y0);
  Vector z(y_hat.size(), 0.0);
  for (std::size_t i = 0; i < g.m; ++i) {
    for (std::size_t k = 0; k < ny; ++k) {
      double s = g.source(i, i) * y0[k];
      for (std::size_t j = 0; j < g.m; ++j) s += g.adjacency(i, j) * y_hat[j * ny + k];
      z[i * ny + k] = s;
    }
  }
  return z;
}

Vector cooperative_error(const NetworkGraph& g, std::span<const double> y_hat, std::span<const double> y0) {
  const std::size_t ny = output_width(g, y_hat, y0);
  const Matrix eye = Matrix::identity(ny);
  Vector ybar0;
  for (std::size_t i = 0; i < g.m; ++i) ybar0.insert(ybar0.end(), y0.begin(), y0.end());
  const Vector e = kron(g.laplacian, eye) * y_hat - kron(g.source, eye) * ybar0;

  const Vector z = in_neighbor_setpoint(g, y_hat, y0);
  const Vector alt = kron(g.total_weight, eye) * y_hat - z;
  double scale = 1.0;
  for (double v : y_hat) scale = std::max(scale, std::abs(v));
  for (double v : y0) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (std::abs(e[i] - alt[i]) > 1e-12 * scale * static_cast<double>(g.m + 1)) {
      throw Error(ErrorCode::kIdentityCheckFailed, "cooperative error paths disagree");
    }
  }
  return e;
}

Vector control_input(const ControlLaw& law, const Matrix& E1, std::span<const double> x_o,
                     std::span<const double> e_bar, std::span<const double> q) {
  const std::size_t m = law.ell_P.size();
  if (law.ell_I.size() != m || m == 0) throw Error(ErrorCode::kDimensionMismatch, "ell_P and ell_I sizes differ");
  if (x_o.size() != E1.cols() || law.K.cols() != E1.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "x_o does not match E1 / K");
  }
  if (e_bar.size() != q.size() || law.K.rows() != e_bar.size() || e_bar.size() % m != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "control input needs nu == ny per unit");
  }
  const std::size_t ny = e_bar.size() / m;
  Vector u = law.K * (E1 * x_o);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < ny; ++k) u[i * ny + k] -= law.ell_P[i] * e_bar[i * ny + k] + law.ell_I[i] * q[i * ny + k];
  return u;
}

ClosedLoop make_closed_loop(const NetworkModel& net, const AugmentedModel& aug, const Matrix& observer_gain,
                            ControlLaw law) {
  if (net.nu != net.ny) throw Error(ErrorCode::kDimensionMismatch, "closed loop needs nu == ny per unit");
  if (law.graph.m != net.m || law.ell_P.size() != net.m || law.ell_I.size() != net.m) {
    throw Error(ErrorCode::kDimensionMismatch, "graph / outer gains do not match the unit count");
  }
  if (law.K.rows() != net.m * net.nu || law.K.cols() != net.state_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "feedback gain has the wrong shape");
  }
  for (std::size_t i = 0; i < net.m; ++i) {
    if (!std::isfinite(law.ell_P[i]) || !std::isfinite(law.ell_I[i])) {
      throw Error(ErrorCode::kNonFinite, "outer-loop gains must be finite");
    }
  }
  return ClosedLoop{net, aug, build_observer(aug, net, observer_gain), std::move(law)};
}

LoopSignals loop_signals(const ClosedLoop& cl, std::span<const double> s, const Exogenous& w) {
  const std::size_t n = cl.net.state_dim();
  const std::size_t na = cl.net.augmented_dim();
  const std::size_t ny = cl.net.output_dim();
  if (s.size() != cl.dim()) throw Error(ErrorCode::kDimensionMismatch, "closed-loop state has the wrong size");
  if (w.fs.size() != ny || w.v.size() != cl.net.D.cols() || w.y0.size() != cl.net.ny) {
    throw Error(ErrorCode::kDimensionMismatch, "exogenous signal sizes do not match the network");
  }
  const auto x = s.subspan(0, n);
  const auto eta = s.subspan(n, na);
  const auto q = s.subspan(n + na, ny);

  LoopSignals out;
  out.y_f = cl.net.C * x + cl.net.F * w.fs;
  const EstimateSplit est = extract_estimates(cl.obs, eta, out.y_f);
  out.x_hat = est.x_hat;
  out.f_hat = est.f_hat;
  out.x_o = concat({est.x_hat, est.f_hat});
  out.y_hat = cl.net.C * out.x_hat;
  out.e = cooperative_error(cl.law.graph, out.y_hat, w.y0);
  out.u = control_input(cl.law, cl.aug.E1, out.x_o, out.e, q);
  return out;
}

Vector closed_loop_rhs(const ClosedLoop& cl, std::span<const double> s, const Exogenous& w) {
  const std::size_t n = cl.net.state_dim();
  const std::size_t na = cl.net.augmented_dim();
  const LoopSignals sig = loop_signals(cl, s, w);
  const auto x = s.subspan(0, n);
  const auto eta = s.subspan(n, na);
  const Vector xdot = cl.net.A * x + cl.net.B * sig.u + cl.net.D * w.v;
  return concat({xdot, observer_derivative(cl.obs, eta, sig.y_f, sig.u), sig.e});
}

Matrix closed_loop_matrix(const ClosedLoop& cl) {
  const std::size_t d = cl.dim();
  const Exogenous zero{Vector(cl.net.D.cols(), 0.0), Vector(cl.net.output_dim(), 0.0), Vector(cl.net.ny, 0.0)};
  Matrix m(d, d);
  Vector s(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    s[j] = 1.0;
    const Vector col = closed_loop_rhs(cl, s, zero);
    for (std::size_t i = 0; i < d; ++i) m(i, j) = col[i];
    s[j] = 0.0;
  }
  return m;
}

}  // namespace ftc
