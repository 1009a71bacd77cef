#pragma once

#include <cstddef>
#include <vector>

#include "ftc/linalg.hpp"

namespace ftc {

/// One unit: x' = A x + B u + D v, y_f = C x + F f_s.
struct AgentModel {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  Matrix F;

  std::size_t nx() const { return A.rows(); }
  std::size_t nu() const { return B.cols(); }
  std::size_t ny() const { return C.rows(); }
  std::size_t nv() const { return D.cols(); }
};

/// Checks shapes, F = I, controllability of (A,B) and observability of (A,C).
/// Throws DimensionMismatch or ValidationError.
void validate_agent(const AgentModel& agent, double rank_tol = 1e-8);

Matrix controllability_matrix(const Matrix& a, const Matrix& b);
Matrix observability_matrix(const Matrix& a, const Matrix& c);

/// DC-motor parameter laws, indexed by unit number i >= 1:
///   b_i = b0 (1 + 0.1 (i-1)), M_i = M0 (1 + 0.05 (i-1)), R_i = R0 (1 - 0.02 (i-1)),
///   L_i = L0 (1 + 0.03 (i-1)), sigma(i) = sigma0 * i.
struct DcMotorParams {
  double J = 0.01;
  double b0 = 0.1;
  double M0 = 0.01;
  double R0 = 1.0;
  double L0 = 0.5;
  double sigma0 = 0.1;
};

AgentModel dc_motor_agent(std::size_t i, const DcMotorParams& params = {});

/// Block-diagonal stacking of m agents sharing (nx, nu, ny, nv).
struct NetworkModel {
  std::size_t m = 0;
  std::size_t nx = 0;
  std::size_t nu = 0;
  std::size_t ny = 0;
  std::size_t nv = 0;
  Matrix A, B, C, D, F;
  std::vector<AgentModel> agents;

  std::size_t state_dim() const { return m * nx; }
  std::size_t output_dim() const { return m * ny; }
  std::size_t augmented_dim() const { return m * (nx + ny); }
};

NetworkModel stack_network(const std::vector<AgentModel>& agents);

/// Joint state/fault representation in the layout x_a = [x_1..x_m, f_1..f_m]:
///   E1 x_a' = A_a x_a + B u + D v,  y_f = E2 x_a,
/// with [F1 F2] the inverse of [E1; E2].
struct AugmentedModel {
  Matrix Aa;  ///< [A, 0]
  Matrix E1;  ///< [I, 0]
  Matrix E2;  ///< [C, F]
  Matrix F1;  ///< [I; -C]
  Matrix F2;  ///< [0; I]
};

AugmentedModel augment_network(const NetworkModel& net);

/// Positions of unit i (0-based) inside the augmented vector: its nx state entries
/// followed by its ny fault entries.
std::vector<std::size_t> augmented_indices(const NetworkModel& net, std::size_t i);

}  // namespace ftc
