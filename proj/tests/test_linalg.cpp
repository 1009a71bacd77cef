#include <gtest/gtest.h>

#include <cmath>

#include "common.hpp"

using namespace ftc;
using ftc::testing::random_matrix;
using ftc::testing::random_vector;

TEST(Solve, IdentityReturnsRhs) {
  const Vector b{1.5, -2.0, 3.25};
  const Vector x = solve_linear(Matrix::identity(3), b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(x[i], b[i]);
}

TEST(Solve, Diagonal) {
  const Vector x = solve_linear(Matrix{{2, 0}, {0, 4}}, Vector{2, 4});
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 1.0);
}

TEST(Solve, RandomResidual) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(5, 5, rng) + 5.0 * Matrix::identity(5);
    const Matrix b = random_matrix(5, 3, rng);
    EXPECT_LE((a * solve_linear(a, b) - b).frobenius_norm(), 1e-9);
  }
}

TEST(Solve, SingularThrows) {
  try {
    solve_linear(Matrix{{1, 2}, {2, 4}}, Vector{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularMatrix);
  }
}

TEST(Eigen, Identity) {
  const SymEig e = sym_eigendecomp(Matrix::identity(4));
  for (double l : e.eigenvalues) EXPECT_NEAR(l, 1.0, 1e-15);
}

TEST(Eigen, DiagonalSortedAscending) {
  const Vector d{3, 1, 2};
  const SymEig e = sym_eigendecomp(Matrix::diagonal(d));
  EXPECT_DOUBLE_EQ(e.eigenvalues[0], 1.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues[1], 2.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues[2], 3.0);
}

TEST(Eigen, ReconstructionAndOrthogonality) {
  std::mt19937_64 rng(3);
  for (std::size_t n : {2u, 6u, 12u, 24u}) {
    const Matrix s = symmetrize(random_matrix(n, n, rng, -5, 5));
    const SymEig e = sym_eigendecomp(s);
    const Matrix rec = e.eigenvectors * Matrix::diagonal(e.eigenvalues) * e.eigenvectors.transpose();
    EXPECT_LE((rec - s).frobenius_norm(), 1e-9 * s.frobenius_norm()) << n;
    EXPECT_LE((e.eigenvectors.transpose() * e.eigenvectors - Matrix::identity(n)).frobenius_norm(), 1e-10) << n;
    for (std::size_t i = 1; i < n; ++i) EXPECT_LE(e.eigenvalues[i - 1], e.eigenvalues[i]);
  }
}

TEST(Eigen, RejectsAsymmetric) {
  EXPECT_THROW(sym_eigendecomp(Matrix{{1, 2}, {0, 1}}), Error);
}

TEST(Eigen, TwoByTwoClosedForm) {
  // eigenvalues of [[a, b], [b, c]]: (a + c)/2 +- sqrt(((a - c)/2)^2 + b^2)
  const double a = 2.0, b = -0.7, c = -1.3;
  const double mid = 0.5 * (a + c), rad = std::hypot(0.5 * (a - c), b);
  const SymEig e = sym_eigendecomp(Matrix{{a, b}, {b, c}});
  EXPECT_NEAR(e.eigenvalues[0], mid - rad, 1e-14);
  EXPECT_NEAR(e.eigenvalues[1], mid + rad, 1e-14);
}

TEST(Kron, IdentityGivesBlockDiagonal) {
  const Matrix b{{1, 2}, {3, 4}};
  const Matrix k = kron(Matrix::identity(2), b);
  const Matrix blocks[] = {b, b};
  EXPECT_EQ(ftc::testing::max_abs_diff(k, block_diagonal(blocks)), 0.0);
}

TEST(Kron, ScalarScales) {
  const Matrix b{{1, -2, 3}};
  EXPECT_EQ(ftc::testing::max_abs_diff(kron(Matrix{{2.5}}, b), 2.5 * b), 0.0);
}

TEST(Kron, EntrywiseIndexFormula) {
  std::mt19937_64 rng(5);
  const Matrix a = random_matrix(2, 3, rng), b = random_matrix(3, 2, rng);
  const Matrix k = kron(a, b);
  ASSERT_EQ(k.rows(), 6u);
  ASSERT_EQ(k.cols(), 6u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = 0; q < 2; ++q) EXPECT_EQ(k(i * 3 + p, j * 2 + q), a(i, j) * b(p, q));
}

TEST(Kron, MixedProduct) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_matrix(2, 3, rng), b = random_matrix(3, 2, rng);
    const Matrix c = random_matrix(3, 2, rng), d = random_matrix(2, 4, rng);
    EXPECT_LE(ftc::testing::max_abs_diff(kron(a, b) * kron(c, d), kron(a * c, b * d)), 1e-10);
  }
}

TEST(Lyapunov, MinusIdentity) {
  const Matrix p = solve_lyapunov(-1.0 * Matrix::identity(3), 2.0 * Matrix::identity(3));
  EXPECT_LE(ftc::testing::max_abs_diff(p, Matrix::identity(3)), 1e-14);
}

TEST(Lyapunov, Diagonal) {
  const Matrix p = solve_lyapunov(Matrix{{-1, 0}, {0, -2}}, Matrix::identity(2));
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(p(1, 1), 0.25, 1e-15);
  EXPECT_NEAR(p(0, 1), 0.0, 1e-15);
}

TEST(Lyapunov, RandomHurwitzResidual) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix phi = random_matrix(4, 4, rng);
    // shift left past the Gershgorin radius
    phi -= 5.0 * Matrix::identity(4);
    const Matrix q = symmetrize(random_matrix(4, 4, rng)) + 5.0 * Matrix::identity(4);
    const Matrix p = solve_lyapunov(phi, q);
    EXPECT_LE((phi.transpose() * p + p * phi + q).frobenius_norm(), 1e-8 * q.frobenius_norm());
    EXPECT_GT(min_eigenvalue(p), 0.0);
    EXPECT_EQ(ftc::testing::max_abs_diff(p, p.transpose()), 0.0);
  }
}

TEST(Hurwitz, Examples) {
  EXPECT_TRUE(is_hurwitz(-1.0 * Matrix::identity(3)));
  EXPECT_FALSE(is_hurwitz(Matrix{{0, 1}, {-1, 0}}));
  EXPECT_FALSE(is_hurwitz(Matrix{{1, 0}, {0, -1}}));
}

TEST(Hurwitz, AgreesWithCharacteristicPolynomial) {
  std::mt19937_64 rng(99);
  int stable = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Matrix a = random_matrix(2, 2, rng, -2, 2);
    const bool oracle = ftc::testing::hurwitz_2x2(a);
    stable += oracle;
    EXPECT_EQ(is_hurwitz(a), oracle) << a(0, 0) << ' ' << a(0, 1) << ' ' << a(1, 0) << ' ' << a(1, 1);
  }
  EXPECT_GT(stable, 20);
}

TEST(NegativeDefinite, Examples) {
  EXPECT_TRUE(is_negative_definite(-1.0 * Matrix::identity(2), 0.5));
  EXPECT_FALSE(is_negative_definite(Matrix(2, 2), 0.0));
  EXPECT_FALSE(is_negative_definite(-1.0 * Matrix::identity(2), 1.5));
}

TEST(Norms, SpectralAndRank) {
  EXPECT_NEAR(spectral_norm(Matrix{{3, 0}, {0, -4}}), 4.0, 1e-12);
  EXPECT_EQ(matrix_rank(Matrix{{1, 2}, {2, 4}}), 1u);
  EXPECT_EQ(matrix_rank(Matrix::identity(3)), 3u);
}

TEST(Matrix, RejectsNonFinite) {
  EXPECT_THROW(Matrix(1, 1, std::vector<double>{NAN}), Error);
}

TEST(Vector, Helpers) {
  std::mt19937_64 rng(1);
  const Vector a = random_vector(4, rng), b = random_vector(4, rng);
  const Vector s = a + b;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(s[i], a[i] + b[i]);
  EXPECT_NEAR(norm(Vector{3, 4}), 5.0, 1e-15);
}
