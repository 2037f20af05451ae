#pragma once

#include <random>
#include <string>
#include <vector>

#include "probedesign/lti_lift.hpp"

namespace fixtures {

using probedesign::LiftedModel;
using probedesign::MatrixXd;
using probedesign::ModelSet;
using probedesign::StateSpaceModel;
using probedesign::VectorXd;

// x(t+1) = a x + b u, y = c x + d u, x(0) = x_bar + q v.
inline StateSpaceModel scalar_model(double a, double b, double c, double d,
                                    double x_bar = 0.0, double q = 1.0,
                                    const std::string& label = "") {
  StateSpaceModel m;
  m.A = MatrixXd::Constant(1, 1, a);
  m.B = VectorXd::Constant(1, b);
  m.C = Eigen::RowVectorXd::Constant(1, c);
  m.D = d;
  m.x_bar = VectorXd::Constant(1, x_bar);
  m.Q = MatrixXd::Constant(1, 1, q);
  m.label = label;
  return m;
}

// Stable random model of order n with a random initial-state spread.
inline StateSpaceModel random_model(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  StateSpaceModel m;
  m.A = MatrixXd(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.A(i, j) = nd(gen);
  const double rad = m.A.eigenvalues().cwiseAbs().maxCoeff();
  m.A *= 0.9 / std::max(rad, 1e-9);
  m.B = VectorXd(n);
  m.C = Eigen::RowVectorXd(n);
  m.x_bar = VectorXd(n);
  m.Q = MatrixXd(n, n);
  for (int i = 0; i < n; ++i) {
    m.B(i) = nd(gen);
    m.C(i) = nd(gen);
    m.x_bar(i) = 0.5 * nd(gen);
    for (int j = 0; j < n; ++j) m.Q(i, j) = 0.5 * nd(gen);
  }
  m.D = 0.3 * nd(gen);
  return m;
}

inline ModelSet make_set(const std::vector<StateSpaceModel>& models, int T,
                         double sigma_bar, double alpha = 0.05) {
  std::vector<LiftedModel> lifted;
  for (const auto& m : models) lifted.emplace_back(m, T);
  return ModelSet(std::move(lifted), sigma_bar, alpha);
}

inline VectorXd gaussian(Eigen::Index n, std::mt19937_64& gen, double s = 1.0) {
  std::normal_distribution<double> nd(0.0, s);
  VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = nd(gen);
  return x;
}

}  // namespace fixtures
