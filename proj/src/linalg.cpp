#include "ftc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ftc/error.hpp"

namespace ftc {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": " + shape(a) + " vs " + shape(b));
  }
}

void require_square(const Matrix& a, const char* op) {
  if (!a.is_square()) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(op) + ": not square " + shape(a));
  }
}

void require_symmetric(const Matrix& s, const char* op) {
  require_square(s, op);
  double asym = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = i + 1; j < s.cols(); ++j) {
      const double d = s(i, j) - s(j, i);
      asym += 2.0 * d * d;
    }
  }
  if (std::sqrt(asym) > 1e-10 * s.frobenius_norm()) {
    throw Error(ErrorCode::kNotSymmetric,
                std::string(op) + ": asymmetry " + std::to_string(std::sqrt(asym)));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "matrix entries " + std::to_string(data_.size()) + " for shape " +
                    std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  if (!all_finite()) throw Error(ErrorCode::kNonFinite, "matrix has NaN/Inf entries");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::kDimensionMismatch, "ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw Error(ErrorCode::kNonFinite, "matrix has NaN/Inf entries");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "block out of range of " + shape(*this));
  }
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "set_block " + shape(b) + " out of range of " + shape(*this));
  }
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

double Matrix::frobenius_norm() const { return norm(data_); }

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "product " + shape(a) + " * " + shape(b));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "product " + shape(a) + " * vector(" + std::to_string(x.size()) + ")");
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    const auto r = a.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector operator+(Vector a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "vector +");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

Vector operator-(Vector a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "vector -");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

Vector operator*(double s, Vector a) {
  for (double& v : a) v *= s;
  return a;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "dot");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) {
  // Scaled sum of squares; avoids overflow on large entries.
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : a) s += (v / scale) * (v / scale);
  return scale * std::sqrt(s);
}

Vector concat(std::initializer_list<std::span<const double>> parts) {
  Vector out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Matrix hcat(std::initializer_list<Matrix> blocks) {
  std::size_t rows = blocks.size() == 0 ? 0 : blocks.begin()->rows();
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw Error(ErrorCode::kDimensionMismatch, "hcat row count");
    cols += b.cols();
  }
  Matrix out(rows, cols);
  std::size_t c = 0;
  for (const auto& b : blocks) {
    out.set_block(0, c, b);
    c += b.cols();
  }
  return out;
}

Matrix vcat(std::initializer_list<Matrix> blocks) {
  std::size_t cols = blocks.size() == 0 ? 0 : blocks.begin()->cols();
  std::size_t rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw Error(ErrorCode::kDimensionMismatch, "vcat column count");
    rows += b.rows();
  }
  Matrix out(rows, cols);
  std::size_t r = 0;
  for (const auto& b : blocks) {
    out.set_block(r, 0, b);
    r += b.rows();
  }
  return out;
}

Matrix block_diagonal(std::span<const Matrix> blocks) {
  std::size_t rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out(rows, cols);
  std::size_t r = 0, c = 0;
  for (const auto& b : blocks) {
    out.set_block(r, c, b);
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Matrix symmetrize(const Matrix& s) {
  require_square(s, "symmetrize");
  Matrix out = s;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = i + 1; j < s.cols(); ++j) out(i, j) = out(j, i) = 0.5 * (s(i, j) + s(j, i));
  return out;
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  require_square(a, "solve_linear");
  if (b.rows() != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "solve_linear rhs " + shape(b) + " for " + shape(a));
  }
  const std::size_t n = a.rows();
  const std::size_t nrhs = b.cols();
  Matrix lu = a;
  Matrix x = b;
  const double tiny = 1e-12 * a.max_abs();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (std::abs(lu(piv, k)) <= tiny || lu(piv, k) == 0.0) {
      throw Error(ErrorCode::kSingularMatrix, "pivot " + std::to_string(lu(piv, k)) +
                                                  " at column " + std::to_string(k));
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < nrhs; ++j) std::swap(x(k, j), x(piv, j));
    }
    const double inv = 1.0 / lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < nrhs; ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < nrhs; ++j) {
      double s = x(kk, j);
      for (std::size_t i = kk + 1; i < n; ++i) s -= lu(kk, i) * x(i, j);
      x(kk, j) = s / lu(kk, kk);
    }
  }
  return x;
}

Vector solve_linear(const Matrix& a, std::span<const double> b) {
  const Matrix x = solve_linear(a, Matrix::column(b));
  return Vector(x.data().begin(), x.data().end());
}

Matrix inverse(const Matrix& a) { return solve_linear(a, Matrix::identity(a.rows())); }

SymEig sym_eigendecomp(const Matrix& s) {
  require_symmetric(s, "sym_eigendecomp");
  const std::size_t n = s.rows();
  Matrix a = symmetrize(s);
  Matrix v = Matrix::identity(n);
  const double target = 1e-12 * a.frobenius_norm();

  auto off_norm = [&] {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(off);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle from tan(2 phi) = 2 a_pq / (a_qq - a_pp), smaller root.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEig out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

double max_eigenvalue(const Matrix& s) {
  const auto e = sym_eigendecomp(s);
  return e.eigenvalues.empty() ? 0.0 : e.eigenvalues.back();
}

double min_eigenvalue(const Matrix& s) {
  const auto e = sym_eigendecomp(s);
  return e.eigenvalues.empty() ? 0.0 : e.eigenvalues.front();
}

double spectral_norm(const Matrix& m) {
  const Matrix gram = symmetrize(m.transpose() * m);
  return std::sqrt(std::max(0.0, max_eigenvalue(gram)));
}

std::size_t matrix_rank(const Matrix& m, double tol) {
  const Matrix gram = symmetrize(m.rows() < m.cols() ? m * m.transpose() : m.transpose() * m);
  const auto e = sym_eigendecomp(gram);
  if (e.eigenvalues.empty()) return 0;
  const double smax = std::sqrt(std::max(0.0, e.eigenvalues.back()));
  if (smax == 0.0) return 0;
  return static_cast<std::size_t>(std::count_if(e.eigenvalues.begin(), e.eigenvalues.end(), [&](double l) {
    return std::sqrt(std::max(0.0, l)) > tol * smax;
  }));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const std::size_t p = b.rows(), q = b.cols();
  Matrix out(a.rows() * p, a.cols() * q);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < p; ++k)
        for (std::size_t l = 0; l < q; ++l) out(i * p + k, j * q + l) = a(i, j) * b(k, l);
  return out;
}

Matrix solve_lyapunov(const Matrix& phi, const Matrix& q) {
  require_square(phi, "solve_lyapunov");
  require_symmetric(q, "solve_lyapunov");
  if (q.rows() != phi.rows()) throw Error(ErrorCode::kDimensionMismatch, "solve_lyapunov Q");
  const std::size_t n = phi.rows();
  const Matrix eye = Matrix::identity(n);
  const Matrix phit = phi.transpose();
  // Column-stacked vec: vec(Phi^T P) = (I (x) Phi^T) vec P, vec(P Phi) = (Phi^T (x) I) vec P.
  const Matrix op = kron(eye, phit) + kron(phit, eye);
  Vector rhs(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) rhs[j * n + i] = -q(i, j);
  Vector vecp;
  try {
    vecp = solve_linear(op, rhs);
  } catch (const Error& e) {
    throw Error(ErrorCode::kNotHurwitz, std::string("Lyapunov operator singular (") + e.what() + ")");
  }
  Matrix p(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) p(i, j) = vecp[j * n + i];
  p = symmetrize(p);
  if (!p.all_finite() || min_eigenvalue(p) <= 0.0) {
    throw Error(ErrorCode::kNotHurwitz, "Lyapunov solution is not positive definite");
  }
  return p;
}

bool is_hurwitz(const Matrix& a) {
  if (!a.is_square()) return false;
  try {
    const Matrix p = solve_lyapunov(a, Matrix::identity(a.rows()));
    return min_eigenvalue(p) > 0.0;
  } catch (const Error&) {
    return false;
  }
}

bool is_negative_definite(const Matrix& s, double margin) {
  if (margin < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative margin");
  const double lmax = max_eigenvalue(s);
  return lmax < 0.0 && lmax <= -margin;
}

}  // namespace ftc
