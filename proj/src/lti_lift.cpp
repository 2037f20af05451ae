#include "probedesign/lti_lift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "probedesign/errors.hpp"

namespace probedesign {
namespace {

// Markov parameters [D, CB, CAB, ..., CA^{T-2}B].
VectorXd markov_parameters(const MatrixXd& A, const VectorXd& B,
                           const RowVectorXd& C, double D, int T) {
  VectorXd g(T);
  g(0) = D;
  VectorXd x = B;
  for (int i = 1; i < T; ++i) {
    g(i) = C.dot(x);
    x = A * x;
  }
  return g;
}

}  // namespace

NoiseModel::NoiseModel() : h_(VectorXd::Ones(1)) {}

NoiseModel NoiseModel::from_impulse_response(VectorXd h) {
  if (h.size() == 0 || h(0) != 1.0) {
    throw InvalidParameter("noise model must be monic: h(0) == 1");
  }
  return NoiseModel(std::move(h));
}

NoiseModel NoiseModel::from_state_space(const MatrixXd& A, const VectorXd& B,
                                        const RowVectorXd& C, double D,
                                        int length) {
  if (A.rows() != A.cols() || B.size() != A.rows() || C.size() != A.rows()) {
    throw DimensionMismatch("noise state-space dimensions are inconsistent");
  }
  if (length < 1) throw InvalidParameter("noise impulse length must be >= 1");
  return from_impulse_response(markov_parameters(A, B, C, D, length));
}

VectorXd NoiseModel::impulse_response(int T) const {
  VectorXd h = VectorXd::Zero(T);
  const Eigen::Index n = std::min<Eigen::Index>(T, h_.size());
  h.head(n) = h_.head(n);
  return h;
}

bool NoiseModel::is_identity() const {
  return (h_.tail(h_.size() - 1).array() == 0.0).all();
}

void StateSpaceModel::validate() const {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.size() != n || C.size() != n || x_bar.size() != n ||
      Q.rows() != n) {
    throw DimensionMismatch("model '" + label +
                            "': A, B, C, x_bar and Q dimensions disagree");
  }
}

StateSpaceModel zoh_discretize(const MatrixXd& Ac, const VectorXd& Bc,
                               const RowVectorXd& C, double D, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  const Eigen::Index n = Ac.rows();
  if (Ac.cols() != n || Bc.size() != n || C.size() != n) {
    throw DimensionMismatch("continuous-time model dimensions disagree");
  }
  // exp([[Ac, Bc], [0, 0]] dt) = [[Ad, Bd], [0, 1]].
  MatrixXd aug = MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = Ac * dt;
  aug.topRightCorner(n, 1) = Bc * dt;
  const MatrixXd E = aug.exp();

  StateSpaceModel m;
  m.A = E.topLeftCorner(n, n);
  m.B = E.topRightCorner(n, 1);
  m.C = C;
  m.D = D;
  m.x_bar = VectorXd::Zero(n);
  m.Q = MatrixXd::Identity(n, n);
  return m;
}

StateSpaceModel zoh_discretize(double zeta, double omega, double dt) {
  if (!(omega > 0.0)) throw InvalidParameter("omega must be positive");
  if (!(zeta >= 0.0)) throw InvalidParameter("zeta must be non-negative");
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  MatrixXd Ac(2, 2);
  Ac << 0.0, 1.0, -omega * omega, -2.0 * zeta * omega;
  VectorXd Bc(2);
  Bc << 0.0, omega * omega;
  RowVectorXd C(2);
  C << 1.0, 0.0;
  StateSpaceModel m = zoh_discretize(Ac, Bc, C, 0.0, dt);
  m.label = "zeta=" + std::to_string(zeta) + ",omega=" + std::to_string(omega);
  return m;
}

MatrixXd lower_toeplitz(const VectorXd& first_column) {
  const Eigen::Index T = first_column.size();
  MatrixXd M = MatrixXd::Zero(T, T);
  for (Eigen::Index j = 0; j < T; ++j) {
    M.col(j).tail(T - j) = first_column.head(T - j);
  }
  return M;
}

MatrixXd pseudo_inverse(const MatrixXd& M) {
  if (M.size() == 0) return MatrixXd::Zero(M.cols(), M.rows());
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double cutoff =
      static_cast<double>(std::max(M.rows(), M.cols())) * s(0) * 1e-12;
  VectorXd inv = VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

LiftedModel::LiftedModel(const StateSpaceModel& model, int T) : T_(T) {
  if (T < 1) throw InvalidParameter("horizon T must be >= 1");
  model.validate();
  const Eigen::Index n = model.order();

  G_ = lower_toeplitz(markov_parameters(model.A, model.B, model.C, model.D, T));
  H_ = lower_toeplitz(model.noise.impulse_response(T));

  Psi_.resize(T, n);
  RowVectorXd row = model.C;
  for (int t = 0; t < T; ++t) {
    Psi_.row(t) = row;
    row = row * model.A;
  }
  PsiQ_ = Psi_ * model.Q;
  x_bar_ = model.x_bar;
  free_response_ = Psi_ * x_bar_;

  noise_block_.resize(T, PsiQ_.cols() + T);
  noise_block_ << PsiQ_, H_;
  pinv_block_ = pseudo_inverse(noise_block_);
  label_ = model.label;
}

LiftedModel build_lifted(const StateSpaceModel& model, int T) {
  return LiftedModel(model, T);
}

VectorXd simulate(const LiftedModel& lifted, const VectorXd& u,
                  const VectorXd& v, const VectorXd& s) {
  const int T = lifted.horizon();
  if (u.size() != T || s.size() != T || v.size() != lifted.ic_dim()) {
    throw DimensionMismatch("simulate: signal lengths do not match the model");
  }
  return lifted.G() * u + lifted.free_response() + lifted.PsiQ() * v +
         lifted.H() * s;
}

ModelSet::ModelSet(std::vector<LiftedModel> models, double sigma_bar,
                   double alpha)
    : models_(std::move(models)), sigma_bar_(sigma_bar), alpha_(alpha) {
  if (models_.size() < 2) throw InvalidParameter("a model set needs N >= 2");
  if (!(sigma_bar >= 0.0)) throw InvalidParameter("sigma_bar must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidParameter("alpha must lie in (0, 1)");
  }
  for (const auto& m : models_) {
    if (m.horizon() != models_.front().horizon()) {
      throw DimensionMismatch("all models in a set must share the horizon T");
    }
  }
}

}  // namespace probedesign
