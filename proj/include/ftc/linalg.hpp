#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ftc {

using Vector = std::vector<double>;

/// Dense row-major real matrix. Small sizes only (a few hundred rows at most).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of row-major entries; throws on size mismatch or NaN/Inf.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  /// n x 1 matrix holding v.
  static Matrix column(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  Matrix transpose() const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Vector operator*(const Matrix& a, std::span<const double> x);

// Vector helpers.
Vector operator+(Vector a, std::span<const double> b);
Vector operator-(Vector a, std::span<const double> b);
Vector operator*(double s, Vector a);
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
Vector concat(std::initializer_list<std::span<const double>> parts);

/// Horizontal / vertical concatenation; row or column counts must agree.
Matrix hcat(std::initializer_list<Matrix> blocks);
Matrix vcat(std::initializer_list<Matrix> blocks);
Matrix block_diagonal(std::span<const Matrix> blocks);
/// (S + S^T) / 2
Matrix symmetrize(const Matrix& s);

/// Solves A X = B by LU with partial pivoting.
Matrix solve_linear(const Matrix& a, const Matrix& b);
Vector solve_linear(const Matrix& a, std::span<const double> b);
Matrix inverse(const Matrix& a);

struct SymEig {
  Vector eigenvalues;  ///< ascending
  Matrix eigenvectors; ///< orthonormal columns, same order as eigenvalues
};

/// Cyclic Jacobi rotations until the off-diagonal norm drops below 1e-12 ||S||_F.
SymEig sym_eigendecomp(const Matrix& s);
double max_eigenvalue(const Matrix& s);
double min_eigenvalue(const Matrix& s);
/// Largest singular value, from the eigenvalues of M^T M.
double spectral_norm(const Matrix& m);
/// Numerical rank with singular-value cutoff tol * sigma_max.
std::size_t matrix_rank(const Matrix& m, double tol = 1e-8);

Matrix kron(const Matrix& a, const Matrix& b);

/// Solves Phi^T P + P Phi + Q = 0 through the Kronecker-vectorized system.
/// Throws NotHurwitz when that system is singular or P is not positive definite.
Matrix solve_lyapunov(const Matrix& phi, const Matrix& q);
bool is_hurwitz(const Matrix& a);
/// lambda_max(S) <= -margin. Strict for margin = 0.
bool is_negative_definite(const Matrix& s, double margin);

}  // namespace ftc
