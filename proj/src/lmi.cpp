#include "ftc/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "ftc/error.hpp"

namespace ftc {

const char* to_string(LmiMethod m) noexcept {
  switch (m) {
    case LmiMethod::kAuto: return "auto";
    case LmiMethod::kAlternatingProjections: return "alternating-projections";
    case LmiMethod::kBarrier: return "barrier";
  }
  return "?";
}

namespace {

struct Entry {
  std::size_t i;
  std::size_t j;
  double value;
};

/// Vectorized problem: full(y) = base + sum_k y_k * terms[k], where "full" stacks the
/// expression with -X for every positive-constrained variable.
class AffineMap {
 public:
  explicit AffineMap(const LmiProblem& problem) : problem_(problem) {
    for (const auto& v : problem.variables) {
      if (v.rows == 0 || v.cols == 0) {
        throw Error(ErrorCode::kInvalidArgument, "variable '" + v.name + "' has zero size");
      }
      if (v.kind != VariableKind::kRectangular && v.rows != v.cols) {
        throw Error(ErrorCode::kInvalidArgument, "symmetric variable '" + v.name + "' not square");
      }
      offsets_.push_back(count_);
      count_ += v.kind == VariableKind::kRectangular ? v.rows * v.cols : v.rows * (v.rows + 1) / 2;
    }

    const std::vector<Matrix> zero = unpack(Vector(count_, 0.0));
    const Matrix f0 = problem.expression(zero);
    if (!f0.is_square()) throw Error(ErrorCode::kInvalidArgument, "LMI expression is not square");
    expr_dim_ = f0.rows();
    full_dim_ = expr_dim_;
    for (const auto& v : problem.variables)
      if (v.kind == VariableKind::kSymmetricPositive) full_dim_ += v.rows;

    base_ = Matrix(full_dim_, full_dim_);
    base_.set_block(0, 0, f0);
    require_symmetric(f0, "constant term");

    terms_.resize(count_);
    for (std::size_t k = 0; k < count_; ++k) {
      Vector y(count_, 0.0);
      y[k] = 1.0;
      const std::vector<Matrix> vars = unpack(y);
      const Matrix fk = problem.expression(vars) - f0;
      require_symmetric(fk, "coefficient of variable entry " + std::to_string(k));
      Matrix full(full_dim_, full_dim_);
      full.set_block(0, 0, fk);
      std::size_t at = expr_dim_;
      for (std::size_t v = 0; v < problem.variables.size(); ++v) {
        if (problem.variables[v].kind != VariableKind::kSymmetricPositive) continue;
        full.set_block(at, at, -vars[v]);
        at += problem.variables[v].rows;
      }
      for (std::size_t i = 0; i < full_dim_; ++i)
        for (std::size_t j = 0; j < full_dim_; ++j)
          if (full(i, j) != 0.0) terms_[k].push_back({i, j, full(i, j)});
    }
    check_affine();
  }

  std::size_t count() const { return count_; }
  std::size_t full_dim() const { return full_dim_; }
  const Matrix& base() const { return base_; }

  std::vector<Matrix> unpack(std::span<const double> y) const {
    std::vector<Matrix> out;
    for (std::size_t v = 0; v < problem_.variables.size(); ++v) {
      const auto& var = problem_.variables[v];
      Matrix m(var.rows, var.cols);
      std::size_t k = offsets_[v];
      if (var.kind == VariableKind::kRectangular) {
        for (std::size_t i = 0; i < var.rows; ++i)
          for (std::size_t j = 0; j < var.cols; ++j) m(i, j) = y[k++];
      } else {
        for (std::size_t i = 0; i < var.rows; ++i)
          for (std::size_t j = i; j < var.cols; ++j) m(i, j) = m(j, i) = y[k++];
      }
      out.push_back(std::move(m));
    }
    return out;
  }

  Matrix full(std::span<const double> y) const {
    Matrix x = base_;
    for (std::size_t k = 0; k < count_; ++k) {
      if (y[k] == 0.0) continue;
      for (const auto& e : terms_[k]) x(e.i, e.j) += y[k] * e.value;
    }
    return x;
  }

  /// <terms[k], m>_F for every k.
  Vector project(const Matrix& m) const {
    Vector out(count_, 0.0);
    for (std::size_t k = 0; k < count_; ++k) {
      double s = 0.0;
      for (const auto& e : terms_[k]) s += e.value * m(e.i, e.j);
      out[k] = s;
    }
    return out;
  }

  Matrix gram() const {
    Matrix g(count_, count_);
    for (std::size_t k = 0; k < count_; ++k) {
      Matrix dense(full_dim_, full_dim_);
      for (const auto& e : terms_[k]) dense(e.i, e.j) = e.value;
      const Vector row = project(dense);
      for (std::size_t l = 0; l < count_; ++l) g(k, l) = row[l];
    }
    return g;
  }

  /// Dense W * terms[k] (W symmetric).
  Matrix times(const Matrix& w, std::size_t k) const {
    Matrix out(full_dim_, full_dim_);
    for (const auto& e : terms_[k])
      for (std::size_t r = 0; r < full_dim_; ++r) out(r, e.j) += w(r, e.i) * e.value;
    return out;
  }

  double trace_with(const Matrix& w, std::size_t k) const {
    double s = 0.0;
    for (const auto& e : terms_[k]) s += w(e.j, e.i) * e.value;
    return s;
  }

  /// Smallest achievable margin bound from diagonal entries no variable touches.
  double margin_upper_bound() const {
    double ub = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < full_dim_; ++i) {
      bool touched = false;
      for (const auto& t : terms_) {
        for (const auto& e : t) {
          if (e.i == i && e.j == i) {
            touched = true;
            break;
          }
        }
        if (touched) break;
      }
      if (!touched) ub = std::min(ub, -base_(i, i));
    }
    return ub;
  }

 private:
  static void require_symmetric(const Matrix& m, const std::string& what) {
    if ((m - m.transpose()).max_abs() > 1e-12 * std::max(1.0, m.max_abs())) {
      throw Error(ErrorCode::kInvalidArgument, "LMI expression not symmetric in " + what);
    }
  }

  void check_affine() const {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector y(count_);
    for (auto& v : y) v = u(rng);
    const Matrix direct = problem_.expression(unpack(y));
    const Matrix via = full(y).block(0, 0, expr_dim_, expr_dim_);
    if ((direct - via).max_abs() > 1e-9 * std::max(1.0, direct.max_abs())) {
      throw Error(ErrorCode::kInvalidArgument, "LMI expression is not affine in its variables");
    }
  }

  const LmiProblem& problem_;
  std::vector<std::size_t> offsets_;
  std::size_t count_ = 0;
  std::size_t expr_dim_ = 0;
  std::size_t full_dim_ = 0;
  Matrix base_;
  std::vector<std::vector<Entry>> terms_;
};

/// Cholesky factor of a symmetric matrix, or nullopt if not positive definite.
std::optional<Matrix> cholesky(const Matrix& s) {
  const std::size_t n = s.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::nullopt;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

struct Candidate {
  Vector y;
  int iterations = 0;
};

std::optional<Candidate> run_alternating_projections(const AffineMap& map, double need, int budget) {
  const std::size_t k = map.count();
  // Pseudo-inverse: directions the expression cannot see (e.g. H = E2' S with S skew)
  // are left at zero.
  const SymEig ge = sym_eigendecomp(map.gram());
  Vector inv_eig(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    if (ge.eigenvalues[i] > 1e-12 * ge.eigenvalues.back()) inv_eig[i] = 1.0 / ge.eigenvalues[i];
  const Matrix gram_inv = ge.eigenvectors * Matrix::diagonal(inv_eig) * ge.eigenvectors.transpose();
  const double ub = map.margin_upper_bound();
  double tau = std::min(1.0, ub);
  std::vector<double> ladder;
  while (tau >= 2.0 * need) {
    ladder.push_back(tau);
    tau *= 0.25;
  }
  ladder.push_back(2.0 * need);
  const int per_rung = std::max(1, budget / static_cast<int>(ladder.size()));

  Vector y(k, 0.0);
  int used = 0;
  for (double target : ladder) {
    for (int it = 0; it < per_rung; ++it, ++used) {
      const Matrix x = map.full(y);
      const SymEig eig = sym_eigendecomp(x);
      if (eig.eigenvalues.back() <= -0.5 * target) return Candidate{y, used};
      // Clip the spectrum to the shifted cone {Z <= -target I}.
      Vector clipped = eig.eigenvalues;
      for (double& l : clipped) l = std::min(l, -target);
      const Matrix& v = eig.eigenvectors;
      Matrix z = v * Matrix::diagonal(clipped) * v.transpose();
      z -= map.base();
      y = gram_inv * map.project(z);
    }
  }
  return std::nullopt;
}

std::optional<Candidate> run_barrier(const AffineMap& map, double bound, int budget) {
  const std::size_t k = map.count();
  const std::size_t n = map.full_dim();
  const Matrix eye = Matrix::identity(n);
  Vector y(k, 0.0);
  double t = -max_eigenvalue(map.base()) - 1.0;
  const double b2 = bound * bound;

  auto slack = [&](std::span<const double> yy, double tt) { return -map.full(yy) - tt * eye; };
  auto objective = [&](std::span<const double> yy, double tt, double mu) -> double {
    for (double v : yy)
      if (std::abs(v) >= bound) return std::numeric_limits<double>::infinity();
    const auto l = cholesky(slack(yy, tt));
    if (!l) return std::numeric_limits<double>::infinity();
    double logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) logdet += 2.0 * std::log((*l)(i, i));
    double box = 0.0;
    for (double v : yy) box += std::log(b2 - v * v);
    return -tt + mu * (-logdet - box);
  };

  const double nu = static_cast<double>(n + 2 * k);
  double mu = 1.0;
  int used = 0;
  while (used < budget) {
    for (int inner = 0; inner < 60 && used < budget; ++inner, ++used) {
      const Matrix w = inverse(slack(y, t));
      std::vector<Matrix> wf;
      wf.reserve(k + 1);
      for (std::size_t a = 0; a < k; ++a) wf.push_back(map.times(w, a));
      wf.push_back(w);  // the margin variable enters as t * I
      Vector g(k + 1);
      Matrix h(k + 1, k + 1);
      for (std::size_t a = 0; a <= k; ++a) {
        g[a] = a < k ? map.trace_with(w, a) : [&] {
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i) s += w(i, i);
          return s;
        }();
        for (std::size_t b = a; b <= k; ++b) {
          double s = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) s += wf[a](i, j) * wf[b](j, i);
          h(a, b) = h(b, a) = s;
        }
      }
      for (std::size_t a = 0; a < k; ++a) {
        const double r = b2 - y[a] * y[a];
        g[a] += 2.0 * y[a] / r;
        h(a, a) += 2.0 * (b2 + y[a] * y[a]) / (r * r);
      }
      Vector grad = mu * g;
      grad[k] -= 1.0;
      const Matrix hess = mu * h;
      Vector step;
      try {
        step = -1.0 * solve_linear(hess, grad);
      } catch (const Error&) {
        break;
      }
      const double decrement = -dot(grad, step);
      if (decrement / 2.0 < 1e-10) break;
      const double f0 = objective(y, t, mu);
      double s = 1.0;
      Vector ny = y;
      double nt = t;
      while (s > 1e-14) {
        for (std::size_t a = 0; a < k; ++a) ny[a] = y[a] + s * step[a];
        nt = t + s * step[k];
        if (objective(ny, nt, mu) <= f0 - 0.25 * s * decrement) break;
        s *= 0.5;
      }
      if (s <= 1e-14) break;
      y = ny;
      t = nt;
    }
    if (mu * nu < 1e-7) break;
    mu *= 0.2;
  }
  if (t <= 0.0) return std::nullopt;
  return Candidate{y, used};
}

}  // namespace

LmiCheck verify_lmi(const LmiProblem& problem, std::span<const Matrix> values) {
  LmiCheck out;
  const Matrix expr = problem.expression(values);
  out.lambda_max = max_eigenvalue(symmetrize(expr));
  out.pd_min = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < problem.variables.size(); ++v) {
    if (problem.variables[v].kind == VariableKind::kSymmetricPositive) {
      out.pd_min = std::min(out.pd_min, min_eigenvalue(symmetrize(values[v])));
    }
  }
  out.ok = out.lambda_max <= -problem.margin && out.lambda_max < 0.0 && out.pd_min >= problem.pd_margin;
  return out;
}

LmiSolution solve_lmi(const LmiProblem& problem, const LmiOptions& options) {
  if (!problem.expression) throw Error(ErrorCode::kInvalidArgument, "LMI has no expression");
  if (!(problem.margin > 0.0) || !(problem.pd_margin > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "LMI margins must be positive");
  }
  const AffineMap map(problem);
  const double need = std::max(problem.margin, problem.pd_margin);

  auto accept = [&](const Candidate& c, LmiMethod method) -> std::optional<LmiSolution> {
    LmiSolution sol;
    sol.values = map.unpack(c.y);
    const LmiCheck check = verify_lmi(problem, sol.values);
    if (!check.ok) return std::nullopt;
    sol.margin = -check.lambda_max;
    sol.pd_margin = check.pd_min;
    sol.method = method;
    sol.iterations = c.iterations;
    return sol;
  };

  if (map.count() == 0) {
    const Candidate c{Vector{}, 0};
    if (auto sol = accept(c, LmiMethod::kAuto)) return *sol;
    std::ostringstream msg;
    msg << "constant LMI has lambda_max " << max_eigenvalue(map.base()) << " > -" << problem.margin;
    throw Error(ErrorCode::kInfeasible, msg.str());
  }

  const double ub = map.margin_upper_bound();
  if (ub < need) {
    std::ostringstream msg;
    msg << "structurally infeasible: an unmodified diagonal entry caps the margin at " << ub
        << " < required " << need;
    throw Error(ErrorCode::kInfeasible, msg.str());
  }

  if (options.method != LmiMethod::kBarrier) {
    if (auto c = run_alternating_projections(map, need, options.ap_iterations)) {
      if (auto sol = accept(*c, LmiMethod::kAlternatingProjections)) return *sol;
    }
  }
  if (options.method != LmiMethod::kAlternatingProjections) {
    if (auto c = run_barrier(map, options.variable_bound, options.barrier_iterations)) {
      if (auto sol = accept(*c, LmiMethod::kBarrier)) return *sol;
    }
  }
  throw Error(ErrorCode::kInfeasible, "no assignment with margin " + std::to_string(problem.margin) +
                                          " found within the iteration budget");
}

}  // namespace ftc
