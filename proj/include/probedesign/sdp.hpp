#pragma once

#include <vector>

#include <Eigen/Core>

namespace probedesign {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Symmetric (T+1)x(T+1) matrix M acting on the homogenized vector [u; 1].
struct QuadForm {
  MatrixXd M;

  // [u; 1]' M [u; 1].
  double evaluate(const VectorXd& u) const;
  // Tr(M U).
  double trace_with(const MatrixXd& U) const;
};

enum class SdpSense {
  // min_U max_l Tr(P_l U)  s.t. Tr(R_k U) >= r, U_nn = 1, U psd
  kMinimizeMax,
  // max_U min_l Tr(P_l U)  s.t. Tr(R_k U) <= r, U_nn = 1, U psd
  kMaximizeMin,
};

/// Generic relaxed design problem over a psd variable U whose last diagonal
/// entry is pinned to 1. All pieces must be positive semidefinite.
struct SdpProblem {
  SdpSense sense = SdpSense::kMinimizeMax;
  std::vector<QuadForm> objective;
  std::vector<QuadForm> constraints;
  double bound = 1.0;

  Eigen::Index dim() const;
  bool minimize() const { return sense == SdpSense::kMinimizeMax; }
  // Throws InvalidParameter/DimensionMismatch on malformed input.
  void validate() const;

  // max_l (or min_l) Tr(P_l U).
  double objective_value(const MatrixXd& U) const;
  // Same aggregate evaluated at U = [u; 1][u; 1]'.
  double objective_value_at(const VectorXd& u) const;
  // Index of the piece attaining the max (min).
  std::size_t active_objective(const MatrixXd& U) const;
  // Smallest signed constraint slack (>= 0 when feasible); +inf for K = 0.
  double min_constraint_slack(const MatrixXd& U) const;
  double min_constraint_slack_at(const VectorXd& u) const;
};

struct SdpOptions {
  double gap_tol = 1e-9;
  double feas_tol = 1e-8;
  int max_iterations = 100;
};

struct SdpSolution {
  MatrixXd U;
  double objective = 0.0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;  // relative
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  int rank = 0;
  // U = [Q Q' + q q', q; q', 1].
  MatrixXd Q_star;
  VectorXd q_star;
  // Rank after the solve and after every rank-reduction step.
  std::vector<int> rank_history;
};

/// Solves the relaxation with a dense primal-dual path-following method.
/// Throws SolverError (kInfeasible, kUnbounded, kMaxIterations, kNumerical).
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

/// Number of eigenvalues of a psd matrix above rel_tol * lambda_max.
int numerical_rank(const MatrixXd& U, double rel_tol = 1e-7);

/// Recomputes rank, Q_star and q_star from U. Eigenvalues of
/// U11 - q q' below 1e-10 are clipped.
void factor_solution(SdpSolution& sol);

}  // namespace probedesign
