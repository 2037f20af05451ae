#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "probedesign/lti_lift.hpp"

namespace probedesign {

/// Initial-condition and noise realizations a model would have needed to
/// reproduce the observed data (least-norm solution).
struct FictitiousSignals {
  VectorXd p_tilde;  // [v_tilde; s_tilde]
  VectorXd v_tilde;
  VectorXd s_tilde;
  double sigma_hat = 0.0;
};

FictitiousSignals fictitious_signals(const LiftedModel& lifted,
                                     const VectorXd& u, const VectorXd& y);

// Maximum-likelihood noise level (|p|^2 / Tn)^(1/2).
double sigma_hat(const VectorXd& p_tilde, int Tn);

/// sigma_hat^2 of every model in the set for the data (u, y).
std::vector<double> sigma_hat_squared(const ModelSet& set, const VectorXd& u,
                                      const VectorXd& y);

// Index of the model with the smallest sigma_hat^2; ties go to the lowest
// index.
std::size_t select_model(const ModelSet& set, const VectorXd& u,
                         const VectorXd& y);
std::size_t select_model(const std::vector<double>& sigma_hat_sq);

// Per-model acceptance threshold (chi2_{1-alpha, Tn-1} / Tn) sigma_bar^2.
double candidate_threshold(const ModelSet& set, std::size_t n);

/// Models not rejected by the chi-squared test at level alpha.
std::vector<std::size_t> candidate_set(const ModelSet& set, const VectorXd& u,
                                       const VectorXd& y);
std::vector<std::size_t> candidate_set(const ModelSet& set,
                                       const std::vector<double>& sigma_hat_sq);

/// Statistics of model `testing` applied to data generated by `generating`:
///   p_tilde_testing = G_bar u + eta_bar + Sigma_tilde p_generating.
struct OrderedPairStats {
  std::size_t testing = 0;
  std::size_t generating = 0;
  MatrixXd G_bar;
  VectorXd eta_bar;
  MatrixXd Sigma_tilde;
  double sigma_norm = 0.0;  // spectral norm of Sigma_tilde
  double chi_testing = 0.0;
  double chi_generating = 0.0;
  // (chi_testing + chi_generating * |Sigma_tilde|) * sigma_bar.
  double margin_threshold = 0.0;

  VectorXd mean_shift(const VectorXd& u) const { return G_bar * u + eta_bar; }
};

/// Both orderings of a model pair plus the shared threshold gamma.
struct PairStats {
  std::size_t a = 0;  // testing model of `forward`
  std::size_t b = 0;  // generating model of `forward`
  OrderedPairStats forward;   // a tested on data from b
  OrderedPairStats backward;  // b tested on data from a
  double gamma = 0.0;         // max of the two margin thresholds
};

OrderedPairStats ordered_pair_stats(const LiftedModel& testing,
                                    const LiftedModel& generating,
                                    double sigma_bar, double alpha);

PairStats pair_stats(const LiftedModel& lifted_a, const LiftedModel& lifted_b,
                     double sigma_bar, double alpha);

/// The M = N(N-1)/2 discrimination pairs in lexicographic (n1, n2) order,
/// n1 < n2. Entry m tests model n2 on data from n1, i.e. a = n2, b = n1.
std::vector<PairStats> discrimination_pairs(const ModelSet& set);

struct MarginCheck {
  double lhs_ab = 0.0;  // |mu_tilde| of the forward ordering
  double lhs_ba = 0.0;  // |mu_tilde| of the backward ordering
  bool satisfied = false;
};

/// Evaluates the two sufficient margins for reliable discrimination of the
/// pair; `satisfied` if either holds strictly.
MarginCheck discrimination_margin(const PairStats& pair, const VectorXd& u);

/// KL divergence of the forward fictitious-vector density from N(0, s^2 I).
/// Throws SingularCovariance if Sigma_tilde Sigma_tilde' is singular and
/// DimensionMismatch if the stacked dimensions differ.
double kl_divergence(const PairStats& pair, const VectorXd& u, double sigma);

struct DiscriminationReport {
  std::vector<double> sigma_hat_sq;
  std::vector<double> thresholds;
  std::vector<std::size_t> candidates;
  std::size_t selected = 0;
};

DiscriminationReport discriminate(const ModelSet& set, const VectorXd& u,
                                  const VectorXd& y);

}  // namespace probedesign
