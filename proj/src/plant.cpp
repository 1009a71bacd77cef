#include "ftc/plant.hpp"

#include <cmath>
#include <string>

#include "ftc/error.hpp"

namespace ftc {

Matrix controllability_matrix(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows();
  Matrix out(n, n * b.cols());
  Matrix blk = b;
  for (std::size_t k = 0; k < n; ++k) {
    out.set_block(0, k * b.cols(), blk);
    blk = a * blk;
  }
  return out;
}

Matrix observability_matrix(const Matrix& a, const Matrix& c) {
  return controllability_matrix(a.transpose(), c.transpose()).transpose();
}

void validate_agent(const AgentModel& agent, double rank_tol) {
  const std::size_t nx = agent.nx();
  if (!agent.A.is_square() || agent.B.rows() != nx || agent.C.cols() != nx || agent.D.rows() != nx) {
    throw Error(ErrorCode::kDimensionMismatch, "agent matrices have inconsistent shapes");
  }
  if (agent.F.rows() != agent.ny() || agent.F.cols() != agent.ny() ||
      (agent.F - Matrix::identity(agent.ny())).max_abs() != 0.0) {
    throw Error(ErrorCode::kValidationError, "fault matrix F must be the identity");
  }
  if (matrix_rank(controllability_matrix(agent.A, agent.B), rank_tol) < nx) {
    throw Error(ErrorCode::kValidationError, "(A, B) is not controllable");
  }
  if (matrix_rank(observability_matrix(agent.A, agent.C), rank_tol) < nx) {
    throw Error(ErrorCode::kValidationError, "(A, C) is not observable");
  }
}

AgentModel dc_motor_agent(std::size_t i, const DcMotorParams& p) {
  if (i < 1) throw Error(ErrorCode::kInvalidArgument, "motor index starts at 1");
  if (!(p.J > 0.0) || !std::isfinite(p.J)) {
    throw Error(ErrorCode::kInvalidArgument, "motor inertia J must be positive and finite");
  }
  const double k = static_cast<double>(i - 1);
  const double b = p.b0 * (1.0 + 0.1 * k);
  const double M = p.M0 * (1.0 + 0.05 * k);
  const double R = p.R0 * (1.0 - 0.02 * k);
  const double L = p.L0 * (1.0 + 0.03 * k);
  if (!(L > 0.0)) throw Error(ErrorCode::kInvalidArgument, "motor inductance must be positive");
  const double sigma = p.sigma0 * static_cast<double>(i);
  AgentModel agent;
  agent.A = Matrix{{-b / p.J, M / p.J}, {-M / L, -R / L}};
  agent.B = Matrix{{0.0}, {1.0 / L}};
  agent.C = Matrix{{1.0, 0.0}};
  agent.D = Matrix{{sigma}, {sigma}};
  agent.F = Matrix::identity(1);
  return agent;
}

NetworkModel stack_network(const std::vector<AgentModel>& agents) {
  if (agents.empty()) throw Error(ErrorCode::kDimensionMismatch, "no agents to stack");
  NetworkModel net;
  net.m = agents.size();
  net.nx = agents[0].nx();
  net.nu = agents[0].nu();
  net.ny = agents[0].ny();
  net.nv = agents[0].nv();
  std::vector<Matrix> a, b, c, d;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& ag = agents[i];
    if (ag.nx() != net.nx || ag.nu() != net.nu || ag.ny() != net.ny || ag.nv() != net.nv ||
        !ag.A.is_square() || ag.B.rows() != net.nx || ag.C.cols() != net.nx || ag.D.rows() != net.nx) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "agent " + std::to_string(i + 1) + " dimensions differ from agent 1");
    }
    a.push_back(ag.A);
    b.push_back(ag.B);
    c.push_back(ag.C);
    d.push_back(ag.D);
  }
  net.A = block_diagonal(a);
  net.B = block_diagonal(b);
  net.C = block_diagonal(c);
  net.D = block_diagonal(d);
  net.F = Matrix::identity(net.m * net.ny);
  net.agents = agents;
  return net;
}

AugmentedModel augment_network(const NetworkModel& net) {
  const std::size_t nx = net.state_dim();
  const std::size_t ny = net.output_dim();
  AugmentedModel aug;
  aug.Aa = hcat({net.A, Matrix(nx, ny)});
  aug.E1 = hcat({Matrix::identity(nx), Matrix(nx, ny)});
  aug.E2 = hcat({net.C, net.F});
  aug.F1 = vcat({Matrix::identity(nx), -net.C});
  aug.F2 = vcat({Matrix(nx, ny), Matrix::identity(ny)});

  const std::size_t na = nx + ny;
  const Matrix eye = Matrix::identity(na);
  const double left = (aug.F1 * aug.E1 + aug.F2 * aug.E2 - eye).max_abs();
  const double right = (vcat({aug.E1, aug.E2}) * hcat({aug.F1, aug.F2}) - eye).max_abs();
  if (left > 1e-12 || right > 1e-12) {
    throw Error(ErrorCode::kIdentityCheckFailed,
                "left-inverse residual " + std::to_string(left) + ", right " + std::to_string(right));
  }
  return aug;
}

std::vector<std::size_t> augmented_indices(const NetworkModel& net, std::size_t i) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < net.nx; ++k) idx.push_back(i * net.nx + k);
  for (std::size_t k = 0; k < net.ny; ++k) idx.push_back(net.m * net.nx + i * net.ny + k);
  return idx;
}

}  // namespace ftc
