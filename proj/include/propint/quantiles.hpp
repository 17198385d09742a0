#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "propint/types.hpp"

namespace propint {

/// Standard normal CDF via the complementary error function.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Standard normal quantile (inverse CDF) for p in (0, 1).
///
/// Rational minimax approximation in three regions (the AS 241 "PPND16"
/// scheme), absolute error below 1e-15 across the domain. The central
/// branch is odd in p - 1/2 and the tail branches mirror each other, so
/// normal_quantile(1 - p) == -normal_quantile(p) whenever 1 - p is exactly
/// representable.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must be in (0, 1), got " +
                            std::to_string(p));
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    z = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    z = num / den;
  }
  return q < 0.0 ? -z : z;
}

/// Critical point of the chi-squared distribution with one degree of
/// freedom and upper tail area alpha. alpha = 0 yields +infinity exactly,
/// alpha = 1 yields 0.
inline CriticalPoint chi_sq_critical(TailArea alpha) {
  const double a = alpha.value();
  if (a == 0.0) return CriticalPoint{kInf, kInf};
  if (a == 1.0) return CriticalPoint{0.0, 0.0};
  const double chi = normal_quantile(1.0 - 0.5 * a);
  return CriticalPoint{chi * chi, chi};
}

}  // namespace propint
