#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace probedesign {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Disturbance dynamics of a candidate model.
///
/// Stored as an impulse response h_0 = 1, h_1, h_2, ...; coefficients past the
/// stored length are zero. A state-space description is converted on
/// construction.
class NoiseModel {
 public:
  // The identity operator (h = [1]).
  NoiseModel();

  static NoiseModel identity() { return NoiseModel(); }
  // Throws InvalidParameter unless h(0) == 1.
  static NoiseModel from_impulse_response(VectorXd h);
  // Impulse response of (A, B, C, D) computed out to `length` samples. D must
  // be exactly 1.
  static NoiseModel from_state_space(const MatrixXd& A, const VectorXd& B,
                                     const RowVectorXd& C, double D,
                                     int length);

  // First T coefficients, zero padded.
  VectorXd impulse_response(int T) const;
  bool is_identity() const;

 private:
  explicit NoiseModel(VectorXd h) : h_(std::move(h)) {}
  VectorXd h_;
};

/// One candidate SISO model
///   x(t+1) = A x(t) + B u(t),  y(t) = C x(t) + D u(t) + (H s)(t),
/// with initial state x(0) = x_bar + Q v.
struct StateSpaceModel {
  MatrixXd A;
  VectorXd B;
  RowVectorXd C;
  double D = 0.0;
  NoiseModel noise;
  VectorXd x_bar;
  MatrixXd Q;
  std::string label;

  Eigen::Index order() const { return A.rows(); }
  Eigen::Index ic_dim() const { return Q.cols(); }

  // Throws DimensionMismatch if the pieces do not fit together.
  void validate() const;
};

/// Zero-order-hold discretization of w^2 / (s^2 + 2 zeta w s + w^2) using the
/// controllable canonical form x = [y, dy/dt]. x_bar and Q default to zero
/// and the 2x2 identity respectively.
StateSpaceModel zoh_discretize(double zeta, double omega, double dt);

/// Zero-order-hold discretization of a general continuous-time (Ac, Bc, C, D).
StateSpaceModel zoh_discretize(const MatrixXd& Ac, const VectorXd& Bc,
                               const RowVectorXd& C, double D, double dt);

/// Finite-horizon lifted form y = G u + Psi x_bar + PsiQ v + H s.
class LiftedModel {
 public:
  LiftedModel(const StateSpaceModel& model, int T);

  int horizon() const { return T_; }
  // Dimension of the stacked fictitious vector [v; s].
  int stacked_dim() const { return T_ + static_cast<int>(PsiQ_.cols()); }
  Eigen::Index ic_dim() const { return PsiQ_.cols(); }

  const MatrixXd& G() const { return G_; }
  const MatrixXd& Psi() const { return Psi_; }
  const MatrixXd& H() const { return H_; }
  const MatrixXd& PsiQ() const { return PsiQ_; }
  const VectorXd& x_bar() const { return x_bar_; }
  // [PsiQ H].
  const MatrixXd& noise_block() const { return noise_block_; }
  // Moore-Penrose pseudo-inverse of [PsiQ H].
  const MatrixXd& pinv_block() const { return pinv_block_; }
  // Psi * x_bar.
  const VectorXd& free_response() const { return free_response_; }
  const std::string& label() const { return label_; }

 private:
  int T_;
  MatrixXd G_, Psi_, H_, PsiQ_, noise_block_, pinv_block_;
  VectorXd x_bar_, free_response_;
  std::string label_;
};

LiftedModel build_lifted(const StateSpaceModel& model, int T);

/// Returns G u + Psi x_bar + PsiQ v + H s.
VectorXd simulate(const LiftedModel& lifted, const VectorXd& u,
                  const VectorXd& v, const VectorXd& s);

/// Lower-triangular Toeplitz matrix with first column `first_column`.
MatrixXd lower_toeplitz(const VectorXd& first_column);

/// SVD pseudo-inverse; singular values below max_dim * sigma_max * 1e-12 are
/// treated as zero.
MatrixXd pseudo_inverse(const MatrixXd& M);

/// Ordered collection of candidate models sharing one horizon.
class ModelSet {
 public:
  ModelSet(std::vector<LiftedModel> models, double sigma_bar, double alpha);

  std::size_t size() const { return models_.size(); }
  const LiftedModel& operator[](std::size_t i) const { return models_[i]; }
  const std::vector<LiftedModel>& models() const { return models_; }
  int horizon() const { return models_.front().horizon(); }
  double sigma_bar() const { return sigma_bar_; }
  double alpha() const { return alpha_; }
  // N (N - 1) / 2.
  std::size_t pair_count() const { return size() * (size() - 1) / 2; }

 private:
  std::vector<LiftedModel> models_;
  double sigma_bar_;
  double alpha_;
};

}  // namespace probedesign
