#include "probedesign/chi2.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include "probedesign/errors.hpp"

namespace probedesign {

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw InvalidParameter("gamma shape must be positive");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(a, x);
}

double chi2_critical(double alpha, int d) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidParameter("alpha must lie in (0, 1)");
  }
  if (d < 1) throw InvalidParameter("degrees of freedom must be >= 1");
  // chi2(d) is Gamma(d / 2, scale 2).
  return 2.0 * boost::math::gamma_p_inv(0.5 * d, 1.0 - alpha);
}

}  // namespace probedesign
