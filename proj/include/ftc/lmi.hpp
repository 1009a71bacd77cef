#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ftc/linalg.hpp"

namespace ftc {

enum class VariableKind {
  kSymmetricPositive,  ///< symmetric and constrained X >= pd_margin * I
  kSymmetric,
  kRectangular,
};

struct LmiVariable {
  std::string name;
  VariableKind kind = VariableKind::kRectangular;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Must be affine in the variables and return a symmetric matrix for every input.
using AffineExpression = std::function<Matrix(std::span<const Matrix> vars)>;

/// Find variables with expression(vars) <= -margin * I and every positive-constrained
/// variable >= pd_margin * I.
struct LmiProblem {
  std::vector<LmiVariable> variables;
  AffineExpression expression;
  double margin = 1e-6;
  double pd_margin = 1e-8;
};

enum class LmiMethod { kAuto, kAlternatingProjections, kBarrier };

const char* to_string(LmiMethod m) noexcept;

struct LmiOptions {
  LmiMethod method = LmiMethod::kAuto;
  /// Total alternating-projection iterations over all target margins.
  int ap_iterations = 6000;
  /// Damped Newton steps across all barrier stages.
  int barrier_iterations = 600;
  /// Box |y_k| < bound on every scalar decision entry, keeps the barrier bounded.
  double variable_bound = 1e4;
};

struct LmiSolution {
  std::vector<Matrix> values;
  double margin = 0.0;     ///< -lambda_max(expression), recomputed from the callback
  double pd_margin = 0.0;  ///< min over positive variables of lambda_min, +inf if none
  LmiMethod method = LmiMethod::kAuto;
  int iterations = 0;
};

/// Max-margin search: alternating projections between the affine image of the
/// variables and the shifted negative-semidefinite cone, then a log-det barrier
/// fallback. Every returned assignment is re-verified by eigendecomposition of
/// the original callback. Throws Infeasible when nothing is found within budget.
LmiSolution solve_lmi(const LmiProblem& problem, const LmiOptions& options = {});

/// lambda_max of the expression and lambda_min of the positive variables at `values`.
struct LmiCheck {
  double lambda_max = 0.0;
  double pd_min = 0.0;
  bool ok = false;
};
LmiCheck verify_lmi(const LmiProblem& problem, std::span<const Matrix> values);

}  // namespace ftc
