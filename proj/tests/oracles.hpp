#pragma once

// Reference computations used by the unit and acceptance tests. Each one
// takes a route that shares no code with the library.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// exp(M) by scaling and squaring around a truncated Taylor series.
inline MatrixXd expm_taylor(const MatrixXd& M) {
  const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const MatrixXd S = M / std::pow(2.0, squarings);
  MatrixXd term = MatrixXd::Identity(M.rows(), M.cols());
  MatrixXd sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = (term * S / k).eval();
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return sum;
}

// Lifted G and Psi obtained by running the recursion on unit impulses.
struct ImpulseLift {
  MatrixXd G;
  MatrixXd Psi;
};

inline ImpulseLift impulse_lift(const MatrixXd& A, const VectorXd& B,
                                const Eigen::RowVectorXd& C, double D, int T) {
  const Eigen::Index n = A.rows();
  ImpulseLift out{MatrixXd::Zero(T, T), MatrixXd::Zero(T, n)};
  for (int j = 0; j < T; ++j) {
    VectorXd x = VectorXd::Zero(n);
    for (int t = 0; t < T; ++t) {
      const double u = t == j ? 1.0 : 0.0;
      out.G(t, j) = C.dot(x) + D * u;
      x = (A * x + B * u).eval();
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    VectorXd x = VectorXd::Unit(n, k);
    for (int t = 0; t < T; ++t) {
      out.Psi(t, k) = C.dot(x);
      x = (A * x).eval();
    }
  }
  return out;
}

// Least-norm solution of a full-row-rank system through A' (A A')^-1 b.
inline VectorXd least_norm(const MatrixXd& A, const VectorXd& b) {
  const MatrixXd AAt = A * A.transpose();
  return A.transpose() * AAt.ldlt().solve(b);
}

// chi-squared CDF by Simpson integration of the density after x = t^2,
// which removes the singularity at the origin for d = 1.
inline double chi2_cdf_integrated(double x, int d) {
  if (x <= 0.0) return 0.0;
  const double k = 0.5 * d;
  const double log_norm = -k * std::log(2.0) - std::lgamma(k);
  const double t_max = std::sqrt(x);
  auto f = [&](double t) {
    if (t <= 0.0) return d == 1 ? 2.0 * std::exp(log_norm) : 0.0;
    return 2.0 * std::exp(log_norm + (d - 1) * std::log(t) - 0.5 * t * t);
  };
  const int n = 20000;
  const double h = t_max / n;
  double s = f(0.0) + f(t_max);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

inline double chi2_quantile_integrated(double alpha, int d) {
  double lo = 0.0;
  double hi = d + 20.0 * std::sqrt(2.0 * d) + 20.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf_integrated(mid, d) < 1.0 - alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Regularized lower incomplete gamma in long double: power series below
// a + 1, Legendre continued fraction (evaluated backwards) above.
inline long double gamma_p_series_ld(long double a, long double x) {
  const long double log_pref = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0L) {
    long double term = 1.0L / a;
    long double sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (term < sum * 1e-21L) break;
    }
    return sum * std::exp(log_pref);
  }
  long double tail = 0.0L;
  for (int n = 4000; n >= 1; --n) tail = n * (n - a) / (x + 2.0L * n + 1.0L - a - tail);
  return 1.0L - std::exp(log_pref) / (x + 1.0L - a - tail);
}

// chi-squared upper quantile by bisection on the long-double gamma oracle.
inline double chi2_quantile_gamma(double alpha, int d) {
  const long double k = 0.5L * d;
  const long double target = 1.0L - alpha;
  long double lo = 0.0L;
  long double hi = d + 40.0L * std::sqrt(2.0L * d) + 40.0L;
  for (int it = 0; it < 300; ++it) {
    const long double mid = 0.5L * (lo + hi);
    (gamma_p_series_ld(k, 0.5L * mid) < target ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

// Largest singular value by power iteration on M' M.
inline double spectral_norm_power(const MatrixXd& M) {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  VectorXd x(M.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = nd(gen);
  double value = 0.0;
  for (int it = 0; it < 5000; ++it) {
    VectorXd y = M.transpose() * (M * x);
    const double next = std::sqrt(y.norm());
    x = y / y.norm();
    if (std::abs(next - value) <= 1e-15 * next) {
      value = next;
      break;
    }
    value = next;
  }
  return value;
}

// Monte Carlo estimate of KL(N(mu, S) || N(0, s0 I)).
inline double kl_monte_carlo(const VectorXd& mu, const MatrixXd& S, double s0,
                             int samples, unsigned seed) {
  const Eigen::Index k = mu.size();
  const Eigen::LLT<MatrixXd> llt(S);
  const MatrixXd L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  double acc = 0.0;
  VectorXd z(k);
  for (int i = 0; i < samples; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) z(j) = nd(gen);
    const VectorXd x = mu + L * z;
    const double log_p = -0.5 * z.squaredNorm() - 0.5 * log_det;
    const double log_q = -0.5 * x.squaredNorm() / (s0 * s0) - k * std::log(s0);
    acc += log_p - log_q;
  }
  return acc / samples;
}

}  // namespace oracle
