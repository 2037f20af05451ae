#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "probedesign/quadprog.hpp"
#include "probedesign/sdp.hpp"

namespace probedesign {

/// Moves an optimal U along directions that keep every constraint trace, the
/// homogenizing entry and the active objective pieces fixed, dropping one rank
/// per step, until no such direction is left. The objective never gets worse.
SdpSolution rank_reduce(const SdpSolution& sol, const SdpProblem& problem);

/// Returns u with U ~ [u; 1][u; 1]' if lambda_2 / lambda_1 <= tol.
std::optional<VectorXd> extract_rank1(const SdpSolution& sol,
                                      double tol = 1e-6);

/// Best point of the exact one-dimensional problem along u(a) = a d + q.
struct LineResult {
  bool feasible = false;
  double a = 0.0;
  double objective = 0.0;  // aggregated pieces, as in SdpProblem
};

LineResult line_search(const SdpProblem& problem, const VectorXd& d,
                       const VectorXd& q);

struct RandomizeOptions {
  int n_samples = 1000;
  std::uint64_t seed = 0;
  // 0 disables. Stop once the best objective is within this factor of the
  // relaxation value (best <= f * sdp for minimization, best >= sdp / f for
  // maximization), checked in blocks so the result is thread-count invariant.
  double early_stop_factor = 0.0;
  int threads = 1;
};

struct QualityBounds {
  bool applicable = false;
  double rho = 0.0;
  double rho_lower = 0.0;
  // Norm-form interval (sqrt of the relaxed Z pieces, upper bound); absent
  // when rho == 0.
  std::optional<std::pair<double, double>> approximation_interval;
  // Piece-units interval [sdp, 27 M^2 / pi * sdp], only when every eta is 0.
  std::optional<std::pair<double, double>> eta_zero_interval;
};

struct DesignResult {
  VectorXd u;
  double z_achieved = 0.0;
  double v_achieved = 0.0;
  double sdp_optimum = 0.0;  // relaxation value of the design objective
  double rho = 0.0;
  std::optional<std::pair<double, double>> approximation_interval;
  std::optional<std::pair<double, double>> eta_zero_interval;
  double rho_lower_bound = 0.0;
  int samples_used = 0;
  int draws = 0;
  std::uint64_t seed = 0;
  std::string method;  // "rank1" or "randomized"
  // Best objective after each sample (randomized designs only).
  std::vector<double> trace;
};

/// Gaussian randomization around the relaxed solution. Under a per-sample
/// amplitude budget (traditional direction) every sample also tries the sign
/// rounding of a draw from N(0, U) and keeps the better point. Throws
/// NoFeasibleSample if no draw gave a feasible line.
DesignResult randomize(const SdpSolution& sol, const AssembledSdp& assembled,
                       const RandomizeOptions& options);

QualityBounds quality_bounds(const SdpSolution& sol,
                             const AssembledSdp& assembled);

struct DesignOptions {
  SdpOptions sdp;
  RandomizeOptions randomize;
  double rank1_tol = 1e-6;
};

struct DesignOutcome {
  DesignResult result;
  SdpSolution relaxed;  // as returned by the solver
  SdpSolution reduced;  // after rank reduction
  AssembledSdp assembled;
  std::vector<PairStats> pairs;
};

/// Solve, reduce, then extract a rank-one input or fall back to
/// randomization.
DesignOutcome design_input(const ModelSet& models, const DesignSpec& spec,
                           const DesignOptions& options = {});

}  // namespace probedesign
