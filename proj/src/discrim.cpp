#include "probedesign/discrim.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "probedesign/chi2.hpp"
#include "probedesign/errors.hpp"

namespace probedesign {

FictitiousSignals fictitious_signals(const LiftedModel& lifted,
                                     const VectorXd& u, const VectorXd& y) {
  const int T = lifted.horizon();
  if (u.size() != T || y.size() != T) {
    throw DimensionMismatch("fictitious_signals: data length must equal T");
  }
  FictitiousSignals f;
  f.p_tilde =
      lifted.pinv_block() * (y - lifted.G() * u - lifted.free_response());
  f.v_tilde = f.p_tilde.head(lifted.ic_dim());
  f.s_tilde = f.p_tilde.tail(T);
  f.sigma_hat = sigma_hat(f.p_tilde, lifted.stacked_dim());
  return f;
}

double sigma_hat(const VectorXd& p_tilde, int Tn) {
  return std::sqrt(p_tilde.squaredNorm() / Tn);
}

std::vector<double> sigma_hat_squared(const ModelSet& set, const VectorXd& u,
                                      const VectorXd& y) {
  std::vector<double> out;
  out.reserve(set.size());
  for (const auto& m : set.models()) {
    const double s = fictitious_signals(m, u, y).sigma_hat;
    out.push_back(s * s);
  }
  return out;
}

std::size_t select_model(const std::vector<double>& sigma_hat_sq) {
  // std::min_element returns the first minimum, which is the tie rule.
  return static_cast<std::size_t>(
      std::min_element(sigma_hat_sq.begin(), sigma_hat_sq.end()) -
      sigma_hat_sq.begin());
}

std::size_t select_model(const ModelSet& set, const VectorXd& u,
                         const VectorXd& y) {
  return select_model(sigma_hat_squared(set, u, y));
}

double candidate_threshold(const ModelSet& set, std::size_t n) {
  const int Tn = set[n].stacked_dim();
  // A single-sample stacked vector has no degrees of freedom left.
  if (Tn < 2) return 0.0;
  return chi2_critical(set.alpha(), Tn - 1) / Tn * set.sigma_bar() *
         set.sigma_bar();
}

std::vector<std::size_t> candidate_set(const ModelSet& set,
                                       const std::vector<double>& sigma_hat_sq) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < set.size(); ++n) {
    if (sigma_hat_sq[n] <= candidate_threshold(set, n)) out.push_back(n);
  }
  return out;
}

std::vector<std::size_t> candidate_set(const ModelSet& set, const VectorXd& u,
                                       const VectorXd& y) {
  return candidate_set(set, sigma_hat_squared(set, u, y));
}

OrderedPairStats ordered_pair_stats(const LiftedModel& testing,
                                    const LiftedModel& generating,
                                    double sigma_bar, double alpha) {
  if (testing.horizon() != generating.horizon()) {
    throw DimensionMismatch("pair_stats: models must share the horizon T");
  }
  OrderedPairStats s;
  const MatrixXd& pinv = testing.pinv_block();
  s.G_bar = pinv * (generating.G() - testing.G());
  s.eta_bar = pinv * (generating.free_response() - testing.free_response());
  s.Sigma_tilde = pinv * generating.noise_block();
  s.sigma_norm = s.Sigma_tilde.size() == 0
                     ? 0.0
                     : Eigen::JacobiSVD<MatrixXd>(s.Sigma_tilde).singularValues()(0);
  auto chi = [alpha](int Tn) {
    return Tn < 2 ? 0.0 : std::sqrt(chi2_critical(alpha, Tn - 1));
  };
  s.chi_testing = chi(testing.stacked_dim());
  s.chi_generating = chi(generating.stacked_dim());
  s.margin_threshold =
      (s.chi_testing + s.chi_generating * s.sigma_norm) * sigma_bar;
  return s;
}

PairStats pair_stats(const LiftedModel& lifted_a, const LiftedModel& lifted_b,
                     double sigma_bar, double alpha) {
  PairStats p;
  p.forward = ordered_pair_stats(lifted_a, lifted_b, sigma_bar, alpha);
  p.backward = ordered_pair_stats(lifted_b, lifted_a, sigma_bar, alpha);
  // Standalone pairs are labelled a = 0, b = 1.
  p.a = p.forward.testing = p.backward.generating = 0;
  p.b = p.forward.generating = p.backward.testing = 1;
  p.gamma = std::max(p.forward.margin_threshold, p.backward.margin_threshold);
  return p;
}

std::vector<PairStats> discrimination_pairs(const ModelSet& set) {
  std::vector<PairStats> pairs;
  pairs.reserve(set.pair_count());
  for (std::size_t n1 = 0; n1 < set.size(); ++n1) {
    for (std::size_t n2 = n1 + 1; n2 < set.size(); ++n2) {
      PairStats p = pair_stats(set[n2], set[n1], set.sigma_bar(), set.alpha());
      p.a = n2;
      p.b = n1;
      p.forward.testing = n2;
      p.forward.generating = n1;
      p.backward.testing = n1;
      p.backward.generating = n2;
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

MarginCheck discrimination_margin(const PairStats& pair, const VectorXd& u) {
  MarginCheck c;
  c.lhs_ab = pair.forward.mean_shift(u).norm();
  c.lhs_ba = pair.backward.mean_shift(u).norm();
  c.satisfied = c.lhs_ab > pair.forward.margin_threshold ||
                c.lhs_ba > pair.backward.margin_threshold;
  return c;
}

double kl_divergence(const PairStats& pair, const VectorXd& u, double sigma) {
  const OrderedPairStats& s = pair.forward;
  if (s.Sigma_tilde.rows() != s.Sigma_tilde.cols()) {
    throw DimensionMismatch(
        "kl_divergence: stacked dimensions of the two models differ");
  }
  const MatrixXd cov = s.Sigma_tilde * s.Sigma_tilde.transpose();
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  const VectorXd& lam = es.eigenvalues();
  if (lam.size() == 0 || lam(0) <= 1e-10 * std::max(1.0, lam(lam.size() - 1))) {
    throw SingularCovariance(
        "kl_divergence: Sigma_tilde Sigma_tilde' is singular");
  }
  const double log_det = lam.array().log().sum();
  const double k = static_cast<double>(cov.rows());
  const double mu_sq = s.mean_shift(u).squaredNorm();
  return mu_sq / (2.0 * sigma * sigma) + 0.5 * (cov.trace() - k - log_det);
}

DiscriminationReport discriminate(const ModelSet& set, const VectorXd& u,
                                  const VectorXd& y) {
  DiscriminationReport r;
  r.sigma_hat_sq = sigma_hat_squared(set, u, y);
  for (std::size_t n = 0; n < set.size(); ++n) {
    r.thresholds.push_back(candidate_threshold(set, n));
  }
  r.candidates = candidate_set(set, r.sigma_hat_sq);
  r.selected = select_model(r.sigma_hat_sq);
  return r;
}

}  // namespace probedesign
