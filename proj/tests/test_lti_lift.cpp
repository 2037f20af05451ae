#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "probedesign/errors.hpp"
#include "probedesign/lti_lift.hpp"

namespace pd = probedesign;
using pd::MatrixXd;
using pd::VectorXd;

namespace {

MatrixXd second_order_aug(double zeta, double omega, double dt) {
  MatrixXd M = MatrixXd::Zero(3, 3);
  M(0, 1) = 1.0;
  M(1, 0) = -omega * omega;
  M(1, 1) = -2.0 * zeta * omega;
  M(1, 2) = omega * omega;
  return oracle::expm_taylor(M * dt);
}

}  // namespace

TEST(Zoh, MatchesTaylorOracleForTurbineModels) {
  for (auto [zeta, omega] : {std::pair{0.6, 11.11}, std::pair{0.45, 5.73}}) {
    const pd::StateSpaceModel m = pd::zoh_discretize(zeta, omega, 0.01);
    const MatrixXd E = second_order_aug(zeta, omega, 0.01);
    EXPECT_LE((m.A - E.topLeftCorner(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((m.B - E.topRightCorner(2, 1)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(m.C(0), 1.0);
    EXPECT_EQ(m.C(1), 0.0);
    EXPECT_EQ(m.D, 0.0);
  }
}

TEST(Zoh, FrozenTurbineCoefficients) {
  const pd::StateSpaceModel normal = pd::zoh_discretize(0.6, 11.11, 0.01);
  EXPECT_NEAR(normal.A(0, 0), 0.9940997763863283, 1e-13);
  EXPECT_NEAR(normal.A(0, 1), 0.00934282002986649, 1e-13);
  EXPECT_NEAR(normal.A(1, 0), -1.153203896208483, 1e-12);
  EXPECT_NEAR(normal.A(1, 1), 0.8695412997481483, 1e-13);
  EXPECT_NEAR(normal.B(0), 0.00590022361367168, 1e-13);
  EXPECT_NEAR(normal.B(1), 1.153203896208483, 1e-12);

  const pd::StateSpaceModel faulty = pd::zoh_discretize(0.45, 5.73, 0.01);
  EXPECT_NEAR(faulty.A(0, 0), 0.9983866547444386, 1e-13);
  EXPECT_NEAR(faulty.A(0, 1), 0.00974119354728091, 1e-13);
  EXPECT_NEAR(faulty.A(1, 0), -0.31983163361851924, 1e-12);
  EXPECT_NEAR(faulty.A(1, 1), 0.9481513196211109, 1e-13);
  EXPECT_NEAR(faulty.B(0), 0.00161334525556149, 1e-13);
  EXPECT_NEAR(faulty.B(1), 0.3198316336185192, 1e-12);
}

TEST(Zoh, IntegratorClosedForm) {
  const pd::StateSpaceModel m =
      pd::zoh_discretize(MatrixXd::Zero(1, 1), VectorXd::Ones(1),
                         Eigen::RowVectorXd::Ones(1), 0.0, 0.01);
  EXPECT_NEAR(m.A(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(m.B(0), 0.01, 1e-15);
}

TEST(Zoh, HalfStepsComposeToFullStep) {
  for (auto [zeta, omega] : {std::pair{0.6, 11.11}, std::pair{0.1, 3.0}}) {
    const MatrixXd half = pd::zoh_discretize(zeta, omega, 0.005).A;
    const MatrixXd full = pd::zoh_discretize(zeta, omega, 0.01).A;
    EXPECT_LE((half * half - full).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Zoh, RejectsBadParameters) {
  EXPECT_THROW(pd::zoh_discretize(0.5, 1.0, 0.0), pd::InvalidParameter);
  EXPECT_THROW(pd::zoh_discretize(0.5, -1.0, 0.1), pd::InvalidParameter);
  EXPECT_THROW(pd::zoh_discretize(-0.1, 1.0, 0.1), pd::InvalidParameter);
}

TEST(Lift, ScalarExample) {
  const pd::LiftedModel L(fixtures::scalar_model(0.5, 1.0, 1.0, 0.0), 3);
  MatrixXd G(3, 3);
  G << 0, 0, 0, 1, 0, 0, 0.5, 1, 0;
  EXPECT_LE((L.G() - G).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(L.Psi()(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(L.Psi()(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(L.Psi()(2, 0), 0.25, 1e-15);
}

TEST(Lift, DirectFeedthroughOnly) {
  pd::StateSpaceModel m = fixtures::scalar_model(0.7, 2.0, 0.0, 1.0);
  const pd::LiftedModel L(m, 5);
  EXPECT_TRUE(L.G().isIdentity(0.0));
  EXPECT_TRUE(L.Psi().isZero(0.0));
}

TEST(Lift, HorizonOne) {
  std::mt19937_64 gen(3);
  const pd::StateSpaceModel m = fixtures::random_model(3, gen);
  const pd::LiftedModel L(m, 1);
  EXPECT_EQ(L.G()(0, 0), m.D);
  EXPECT_LE((L.Psi().row(0) - m.C).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(L.stacked_dim(), 1 + 3);
}

TEST(Lift, MatchesImpulseOracleOnRandomModels) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const pd::StateSpaceModel m = fixtures::random_model(n, gen);
    const int T = 1 + trial;
    const pd::LiftedModel L(m, T);
    const oracle::ImpulseLift ref = oracle::impulse_lift(m.A, m.B, m.C, m.D, T);
    EXPECT_LE((L.G() - ref.G).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((L.Psi() - ref.Psi).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((L.PsiQ() - ref.Psi * m.Q).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Lift, NoiseOperatorIsInvertibleLowerTriangular) {
  std::mt19937_64 gen(5);
  pd::StateSpaceModel m = fixtures::random_model(2, gen);
  VectorXd h(4);
  h << 1.0, 0.8, -0.3, 0.1;
  m.noise = pd::NoiseModel::from_impulse_response(h);
  const pd::LiftedModel L(m, 12);
  const MatrixXd& H = L.H();
  EXPECT_TRUE(H.isLowerTriangular(0.0));
  const MatrixXd Hinv = H.triangularView<Eigen::Lower>().solve(
      MatrixXd::Identity(12, 12));
  EXPECT_LE((Hinv * H - MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(H(3, 0), 0.1, 0.0);
  EXPECT_NEAR(H(4, 0), 0.0, 0.0);
}

TEST(Lift, PseudoInverseGivesOrthogonalProjection) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    const pd::LiftedModel L(fixtures::random_model(1 + trial % 3, gen), 6 + trial);
    const MatrixXd P = L.pinv_block() * L.noise_block();
    EXPECT_LE((P * P - P).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Lift, NoiseFromStateSpace) {
  MatrixXd A = MatrixXd::Constant(1, 1, 0.5);
  const pd::NoiseModel nm = pd::NoiseModel::from_state_space(
      A, VectorXd::Ones(1), Eigen::RowVectorXd::Ones(1), 1.0, 4);
  const VectorXd h = nm.impulse_response(6);
  VectorXd expected(6);
  expected << 1.0, 1.0, 0.5, 0.25, 0.0, 0.0;
  EXPECT_LE((h - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_FALSE(nm.is_identity());
  EXPECT_TRUE(pd::NoiseModel::identity().is_identity());
  EXPECT_THROW(pd::NoiseModel::from_state_space(A, VectorXd::Ones(1),
                                                Eigen::RowVectorXd::Ones(1),
                                                0.5, 4),
               pd::InvalidParameter);
}

TEST(Simulate, Examples) {
  pd::StateSpaceModel m = fixtures::scalar_model(0.5, 1.0, 1.0, 0.0, 0.0);
  const pd::LiftedModel L(m, 3);
  VectorXd u(3);
  u << 1, 0, 0;
  const VectorXd y = pd::simulate(L, u, VectorXd::Zero(1), VectorXd::Zero(3));
  EXPECT_NEAR(y(0), 0.0, 1e-15);
  EXPECT_NEAR(y(1), 1.0, 1e-15);
  EXPECT_NEAR(y(2), 0.5, 1e-15);

  m.x_bar(0) = 2.0;
  const pd::LiftedModel L2(m, 3);
  const VectorXd y0 =
      pd::simulate(L2, VectorXd::Zero(3), VectorXd::Zero(1), VectorXd::Zero(3));
  EXPECT_LE((y0 - L2.Psi() * m.x_bar).cwiseAbs().maxCoeff(), 1e-15);

  const pd::LiftedModel identity(fixtures::scalar_model(0.3, 1.0, 0.0, 1.0), 4);
  const VectorXd w = VectorXd::LinSpaced(4, -1.0, 2.0);
  EXPECT_LE((pd::simulate(identity, w, VectorXd::Zero(1), VectorXd::Zero(4)) - w)
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
}

TEST(Simulate, SuperpositionInInputs) {
  std::mt19937_64 gen(21);
  const pd::LiftedModel L(fixtures::random_model(3, gen), 15);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd u1 = fixtures::gaussian(15, gen), u2 = fixtures::gaussian(15, gen);
    const VectorXd v1 = fixtures::gaussian(3, gen), v2 = fixtures::gaussian(3, gen);
    const VectorXd s1 = fixtures::gaussian(15, gen), s2 = fixtures::gaussian(15, gen);
    const VectorXd y12 = pd::simulate(L, u1 + u2, v1 + v2, s1 + s2);
    const VectorXd y2 = pd::simulate(L, u2, v2, s2);
    const VectorXd zero_ic = L.G() * u1 + L.PsiQ() * v1 + L.H() * s1;
    EXPECT_LE((y12 - y2 - zero_ic).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Simulate, RejectsWrongLengths) {
  const pd::LiftedModel L(fixtures::scalar_model(0.5, 1.0, 1.0, 0.0), 3);
  EXPECT_THROW(pd::simulate(L, VectorXd::Zero(2), VectorXd::Zero(1),
                            VectorXd::Zero(3)),
               pd::DimensionMismatch);
  EXPECT_THROW(pd::simulate(L, VectorXd::Zero(3), VectorXd::Zero(2),
                            VectorXd::Zero(3)),
               pd::DimensionMismatch);
}

TEST(ModelSetTest, PairCountAndValidation) {
  const pd::ModelSet set = fixtures::make_set(
      {fixtures::scalar_model(0.5, 1, 1, 0), fixtures::scalar_model(0.6, 1, 1, 0),
       fixtures::scalar_model(0.7, 1, 1, 0), fixtures::scalar_model(0.8, 1, 1, 0)},
      5, 1.0);
  EXPECT_EQ(set.pair_count(), 6u);
  EXPECT_THROW(fixtures::make_set({fixtures::scalar_model(0.5, 1, 1, 0)}, 5, 1.0),
               pd::InvalidParameter);
  std::vector<pd::LiftedModel> mixed{
      pd::LiftedModel(fixtures::scalar_model(0.5, 1, 1, 0), 4),
      pd::LiftedModel(fixtures::scalar_model(0.5, 1, 1, 0), 5)};
  EXPECT_THROW(pd::ModelSet(mixed, 1.0, 0.05), pd::DimensionMismatch);
  EXPECT_THROW(fixtures::make_set({fixtures::scalar_model(0.5, 1, 1, 0),
                                   fixtures::scalar_model(0.6, 1, 1, 0)},
                                  5, 1.0, 1.5),
               pd::InvalidParameter);
}
