#pragma once

namespace probedesign {

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double regularized_gamma_p(double a, double x);

// Upper quantile of the chi-squared distribution: the q with
// P[X <= q] = 1 - alpha for X ~ chi2(d). Throws InvalidParameter unless
// 0 < alpha < 1 and d >= 1.
double chi2_critical(double alpha, int d);

}  // namespace probedesign
