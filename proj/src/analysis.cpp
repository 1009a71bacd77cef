#include "ftc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ftc/control.hpp"
#include "ftc/error.hpp"

namespace ftc {

namespace {

double sq(std::span<const double> v) { return dot(v, v); }

bool near_event(const std::vector<std::size_t>& events, std::size_t lo, std::size_t hi) {
  for (std::size_t e : events)
    if (e > lo && e <= hi) return true;
  return false;
}

Vector repeat(std::span<const double> v, std::size_t m) {
  Vector out;
  out.reserve(v.size() * m);
  for (std::size_t i = 0; i < m; ++i) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace

IssCertificate iss_certificate(const Matrix& Phi, const Matrix& B_phi, const Matrix& Q) {
  if (!Q.is_square() || Q.rows() != Phi.rows() || B_phi.rows() != Phi.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "Phi, B_phi and Q do not conform");
  }
  const double qmin = min_eigenvalue(symmetrize(Q));
  if (!(qmin > 0.0) || (Q - Q.transpose()).max_abs() > 1e-12 * std::max(1.0, Q.max_abs())) {
    throw Error(ErrorCode::kInvalidArgument, "Q must be symmetric positive definite");
  }
  IssCertificate c;
  c.Phi = Phi;
  c.B_phi = B_phi;
  c.Q = Q;
  c.P_e = solve_lyapunov(Phi, Q);
  c.residual = (Phi.transpose() * c.P_e + c.P_e * Phi + Q).frobenius_norm();
  const SymEig pe = sym_eigendecomp(c.P_e);
  const double pmin = pe.eigenvalues.front();
  const double pmax = pe.eigenvalues.back();
  c.kappa = spectral_norm(c.P_e * B_phi);
  c.alpha = qmin / (2.0 * pmax);
  c.beta = 2.0 * c.kappa * c.kappa / qmin;
  c.c1 = std::sqrt(pmax / pmin);
  c.c2 = c.alpha / 2.0;
  c.c3 = std::sqrt(c.beta / (c.alpha * pmin));
  return c;
}

IssCertificate iss_certificate(const NetworkGraph& g, const NetworkModel& net, const Matrix& K, const Matrix& Q) {
  if (g.m != net.m) throw Error(ErrorCode::kDimensionMismatch, "graph and network unit counts differ");
  if (!is_positive_stable(g.laplacian)) {
    throw Error(ErrorCode::kNotPositiveStable, "augmented Laplacian is not positive stable");
  }
  const Matrix acl = net.A + net.B * K;
  if (!is_hurwitz(acl)) throw Error(ErrorCode::kNotHurwitz, "A + B K is not Hurwitz");
  const Matrix li = kron(g.laplacian, Matrix::identity(net.nx));
  const Matrix phi = li * acl * inverse(li);
  const Matrix b_phi = li * hcat({net.D, -net.B});
  return iss_certificate(phi, b_phi, Q);
}

Vector cooperative_state_error(const NetworkGraph& g, std::span<const double> x, std::span<const double> x0) {
  if (x0.empty() || x.size() != g.m * x0.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "x must hold m * nx entries for nx = x0.size()");
  }
  const Matrix eye = Matrix::identity(x0.size());
  return kron(g.laplacian, eye) * x - kron(g.source, eye) * repeat(x0, g.m);
}

Vector source_state(const NetworkModel& net, std::span<const double> y0) {
  const Matrix& c = net.agents.front().C;
  if (y0.size() != c.rows()) throw Error(ErrorCode::kDimensionMismatch, "y0 size does not match C");
  const Matrix ct = c.transpose();
  return ct * solve_linear(c * ct, y0);
}

Vector theta_star(const SimTrace& tr, const Matrix& K, std::size_t k) {
  return concat({tr.v[k], K * tr.x[k] - tr.u[k]});
}

Vector theta_bar(const SimTrace& tr, const Matrix& K, std::size_t k) {
  return concat({tr.v[k], K * (tr.x[k] - tr.x_hat[k])});
}

IssReport verify_iss_bound(const SimTrace& tr, const IssCertificate& cert, const NetworkGraph& g,
                           const NetworkModel& net, const Matrix& K, double consistency_tol) {
  const std::size_t rows = tr.rows();
  const Matrix a0 = kron(g.source, Matrix::identity(net.nx));
  IssReport rep;
  std::vector<Vector> et(rows);
  std::vector<double> et_norm(rows), th_norm(rows);
  std::vector<Vector> theta(rows);
  Vector last_y0;
  Vector x0;
  Vector e_star;
  for (std::size_t k = 0; k < rows; ++k) {
    if (k == 0 || tr.y0[k] != last_y0) {
      last_y0 = tr.y0[k];
      x0 = source_state(net, last_y0);
      for (const auto& a : net.agents) rep.x0_output_mismatch = std::max(rep.x0_output_mismatch, norm(a.C * x0 - last_y0));
      const Vector x0bar = repeat(x0, net.m);
      const Vector phi0 = cert.Phi * (a0 * x0bar);
      e_star = -1.0 * solve_linear(cert.Phi, phi0);
      rep.equilibrium_gap = std::max(rep.equilibrium_gap, norm(e_star + a0 * x0bar));
    }
    et[k] = cooperative_state_error(g, tr.x[k], x0) - e_star;
    theta[k] = theta_star(tr, K, k);
    et_norm[k] = norm(et[k]);
    th_norm[k] = norm(theta[k]);
  }

  std::vector<std::size_t> starts{0};
  for (std::size_t e : tr.events)
    if (e < rows) starts.push_back(e);
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t s : starts) {
    double sup = 0.0;
    for (std::size_t k = s; k < rows; ++k) {
      sup = std::max(sup, th_norm[k]);
      const double bound = cert.c1 * std::exp(-cert.c2 * (tr.t[k] - tr.t[s])) * et_norm[s] + cert.c3 * sup;
      const double viol = (et_norm[k] - bound) / std::max(bound, 1e-300);
      ++rep.samples;
      if (viol > rep.max_violation) {
        rep.max_violation = viol;
        rep.worst_index = k;
      }
    }
  }

  // Simpson residual of e~(k+1) - e~(k-1) = int (Phi e~ + B_phi theta*) over smooth stretches.
  const double h = tr.h;
  std::vector<Vector> rhs_a(rows), rhs_b(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    rhs_a[k] = cert.Phi * et[k];
    rhs_b[k] = cert.B_phi * theta[k];
  }
  std::vector<double> num(rows, 0.0), den(rows, 0.0);
  double peak = 0.0;
  for (std::size_t k = 1; k + 1 < rows; ++k) {
    if (near_event(tr.events, k - 1, k + 1)) continue;
    for (std::size_t i = 0; i < et[k].size(); ++i) {
      const double integral = h / 3.0 *
                              (rhs_a[k - 1][i] + rhs_b[k - 1][i] + 4.0 * (rhs_a[k][i] + rhs_b[k][i]) +
                               rhs_a[k + 1][i] + rhs_b[k + 1][i]);
      const double diff = et[k + 1][i] - et[k - 1][i];
      num[k] = std::max(num[k], std::abs(diff - integral));
      const double scale = std::abs(diff) +
                           h / 3.0 *
                               (std::abs(rhs_a[k - 1][i]) + std::abs(rhs_b[k - 1][i]) +
                                4.0 * (std::abs(rhs_a[k][i]) + std::abs(rhs_b[k][i])) + std::abs(rhs_a[k + 1][i]) +
                                std::abs(rhs_b[k + 1][i]));
      den[k] = std::max(den[k], scale);
    }
    peak = std::max(peak, den[k]);
  }
  // Samples whose local scale has decayed to round-off are measured against the trace peak.
  const double floor = std::max(1e-9 * peak, 1e-300);
  rep.consistency = 0.0;
  for (std::size_t k = 1; k + 1 < rows; ++k) rep.consistency = std::max(rep.consistency, num[k] / std::max(den[k], floor));
  rep.consistent = rep.consistency <= consistency_tol;
  rep.pass = rep.max_violation <= 1e-9 && rep.consistent;
  return rep;
}

DissipationReport dissipation_check(const SimTrace& tr, const AugmentedModel& aug, const NetworkModel& net,
                                    const ObserverSynthesis& obs, double tol, double fd_tol) {
  const std::size_t rows = tr.rows();
  const Matrix a_obs = aug.F1 * aug.Aa - obs.gain * aug.E2;
  const Matrix f1d = aug.F1 * net.D;
  const double d2 = obs.delta * obs.delta;
  DissipationReport rep;
  rep.max_d = -std::numeric_limits<double>::infinity();
  Vector V(rows), Vdot(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    const Vector eps = concat({tr.x[k] - tr.x_hat[k], tr.fs[k] - tr.f_hat[k]});
    const Vector p_eps = obs.P * eps;
    V[k] = dot(eps, p_eps);
    Vdot[k] = 2.0 * dot(p_eps, a_obs * eps + f1d * tr.v[k]);
    if (k == tr.fault_step && k > 0) continue;
    const double d = Vdot[k] + sq(eps) - d2 * sq(tr.v[k]);
    ++rep.samples;
    if (d > rep.max_d) {
      rep.max_d = d;
      rep.worst_index = k;
    }
  }
  const double max_p = max_eigenvalue(symmetrize(obs.P));
  double vdot_scale = 0.0;
  for (double v : Vdot) vdot_scale = std::max(vdot_scale, std::abs(v));
  double dev = 0.0;
  for (std::size_t k = 1; k + 1 < rows; ++k) {
    if (near_event(tr.events, k - 1, k + 1)) continue;
    const double fd = (V[k + 1] - V[k - 1]) / (2.0 * tr.h);
    dev = std::max(dev, std::abs(fd - Vdot[k]));
    const bool quiet = sq(tr.v[k]) == 0.0 && sq(tr.v[k + 1]) == 0.0;
    // Below ~1e-10 relative the error is rounding noise in x - x_hat.
    const double floor = 1e-10 * (1.0 + norm(tr.x[k]) + norm(tr.fs[k]));
    if (quiet && V[k] > floor * floor * max_p && !(V[k + 1] < V[k])) rep.monotone_without_disturbance = false;
  }
  rep.fd_deviation = dev / std::max(vdot_scale, 1e-300);
  rep.fd_ok = rep.fd_deviation <= fd_tol;
  rep.pass = rep.max_d <= tol && rep.fd_ok;
  return rep;
}

ConsensusReport consensus_report(const SimTrace& tr, const NetworkModel& net, double band) {
  const std::size_t rows = tr.rows();
  const std::size_t m = net.m;
  const std::size_t ny = net.ny;
  std::vector<Vector> y(rows);
  for (std::size_t k = 0; k < rows; ++k) y[k] = net.C * tr.x[k];
  std::size_t start = 0;
  for (std::size_t e : tr.events)
    if (e < rows && e > 0 && tr.y0[e] != tr.y0[e - 1]) start = std::max(start, e);

  const Vector& yT = y.back();
  const Vector& y0T = tr.y0.back();
  double ref = 0.0;
  for (double v : y0T) ref = std::max(ref, std::abs(v));
  const double tolerance = band * (ref > 0.0 ? ref : 1.0);

  ConsensusReport rep;
  rep.settling_time.assign(m, 0.0);
  rep.offset.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    auto dev = [&](std::size_t k) {
      double d = 0.0;
      for (std::size_t c = 0; c < ny; ++c) d = std::max(d, std::abs(y[k][i * ny + c] - y0T[c]));
      return d;
    };
    std::size_t last_out = rows;
    for (std::size_t k = start; k < rows; ++k)
      if (dev(k) > tolerance) last_out = k;
    if (last_out == rows) {
      rep.settling_time[i] = 0.0;
    } else if (last_out + 1 == rows) {
      rep.settling_time[i] = std::numeric_limits<double>::infinity();
    } else {
      rep.settling_time[i] = tr.t[last_out + 1] - tr.t[start];
    }
    for (std::size_t c = 0; c < ny; ++c) rep.offset[i] = std::max(rep.offset[i], std::abs(yT[i * ny + c] - y0T[c]));
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t c = 0; c < ny; ++c)
        rep.disagreement = std::max(rep.disagreement, std::abs(yT[i * ny + c] - yT[j * ny + c]));
  }
  rep.max_offset = *std::max_element(rep.offset.begin(), rep.offset.end());
  rep.max_settling = *std::max_element(rep.settling_time.begin(), rep.settling_time.end());
  for (const auto& e : tr.e) rep.max_error_norm = std::max(rep.max_error_norm, norm(e));
  rep.final_error_norm = norm(tr.e.back());
  return rep;
}

GainRatioReport l2_gain_ratio(const SimTrace& tr, const Matrix& K, double gamma, double tol) {
  GainRatioReport rep;
  double sx = 0.0, st = 0.0;
  for (std::size_t k = 0; k < tr.rows(); ++k) {
    sx += sq(tr.x[k]) * tr.h;
    st += sq(theta_bar(tr, K, k)) * tr.h;
  }
  rep.x_norm = std::sqrt(sx);
  rep.theta_norm = std::sqrt(st);
  rep.ratio = st > 0.0 ? rep.x_norm / rep.theta_norm : (sx > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  rep.gamma = gamma;
  rep.pass = rep.ratio <= gamma * (1.0 + tol);
  return rep;
}

RampRun summarize_ramp_run(const SimTrace& tr, const NetworkGraph& g, const Matrix& K, double rate) {
  RampRun run;
  run.rate = rate;
  const Matrix li = kron(g.laplacian, Matrix::identity(tr.nx));
  for (std::size_t k = 0; k < tr.rows(); ++k) {
    // e~ = e_x - e* = (L (x) I) x for any source state, constant or not.
    const double e = norm(li * tr.x[k]);
    const double th = norm(theta_star(tr, K, k));
    if (!std::isfinite(e) || !std::isfinite(th)) run.finite = false;
    run.sup_error = std::max(run.sup_error, e);
    run.sup_theta = std::max(run.sup_theta, th);
  }
  return run;
}

BoundednessReport timevarying_reference_boundedness(std::vector<RampRun> runs) {
  std::sort(runs.begin(), runs.end(), [](const RampRun& a, const RampRun& b) { return a.rate < b.rate; });
  if (runs.empty() || runs.front().rate != 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "ramp sweep needs a zero-rate run");
  }
  BoundednessReport rep;
  rep.runs = runs;
  rep.all_finite = std::all_of(runs.begin(), runs.end(), [](const RampRun& r) { return r.finite; });

  bool any_pair = false;
  rep.doubling_ok = true;
  for (const auto& a : runs) {
    for (const auto& b : runs) {
      if (a.rate > 0.0 && std::abs(b.rate - 2.0 * a.rate) <= 1e-9 * b.rate) {
        any_pair = true;
        const double ratio = b.sup_error / std::max(a.sup_error, 1e-300);
        rep.max_doubling_ratio = std::max(rep.max_doubling_ratio, ratio);
        if (ratio > 2.5) rep.doubling_ok = false;
      }
    }
  }
  rep.doubling_ok = rep.doubling_ok && any_pair;

  rep.intercept = runs.front().sup_error;
  const RampRun& top = runs.back();
  rep.slope = top.rate > 0.0 ? std::max(0.0, (top.sup_error - rep.intercept) / top.rate) : 0.0;
  rep.envelope_ok = true;
  for (const auto& r : runs) {
    const double env = rep.intercept + rep.slope * r.rate;
    if (r.sup_error > env * (1.0 + 1e-9) + 1e-12) rep.envelope_ok = false;
  }
  rep.pass = rep.all_finite && rep.doubling_ok && rep.envelope_ok;
  return rep;
}

EquivalenceReport consensus_equivalence_check(const NetworkGraph& g, std::size_t ny, std::uint64_t seed, int trials) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const Matrix eye = Matrix::identity(ny);
  const Matrix l = kron(g.laplacian, eye);
  const Matrix a0 = kron(g.source, eye);
  EquivalenceReport rep;
  for (int t = 0; t < trials; ++t) {
    Vector y0(ny);
    for (auto& v : y0) v = u(rng);
    const Vector ybar0 = repeat(y0, g.m);

    rep.forward = std::max(rep.forward, norm(cooperative_error(g, ybar0, y0)));

    const Vector solved = solve_linear(l, a0 * ybar0);
    for (std::size_t i = 0; i < solved.size(); ++i)
      rep.backward = std::max(rep.backward, std::abs(solved[i] - ybar0[i]));

    Vector p(ybar0.size());
    for (auto& v : p) v = u(rng);
    const double scale = 1e-10 / norm(l * p);
    Vector y = ybar0;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += scale * p[i];
    const Vector e = cooperative_error(g, y, y0);
    if (norm(e) <= 1e-10 * (1.0 + 1e-6) + 1e-15 * norm(y)) {
      for (std::size_t i = 0; i < y.size(); ++i)
        rep.perturbation = std::max(rep.perturbation, std::abs(y[i] - ybar0[i]));
    }
  }
  rep.pass = rep.forward <= 1e-10 && rep.backward <= 1e-8 && rep.perturbation <= 1e-8;
  return rep;
}

NetworkGraph random_reachable_graph(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<UnitEdge> edges;
  std::vector<SourceLink> sources{{order[0], w(rng)}};
  auto has_edge = [&](std::size_t to, std::size_t from) {
    return std::any_of(edges.begin(), edges.end(), [&](const UnitEdge& e) { return e.to == to && e.from == from; });
  };
  // Spanning tree from the source in a random order, then extra edges.
  for (std::size_t k = 1; k < m; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k);
    const std::size_t parent = pick(rng);
    if (parent == k) {
      sources.push_back({order[k], w(rng)});
    } else {
      edges.push_back({order[k], order[parent], w(rng)});
    }
  }
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (i != j && !has_edge(i, j) && coin(rng) < 0.3) edges.push_back({i, j, w(rng)});
    }
  }
  return normalize_weights(build_graph(m, edges, sources));
}

}  // namespace ftc
