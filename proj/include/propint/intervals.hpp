#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "propint/quantiles.hpp"
#include "propint/types.hpp"

namespace propint {

namespace detail {

inline void check_sample_against_population(double n, PopulationSize N) {
  if (N.is_finite() && n > N.value()) {
    throw std::domain_error("sample size n = " + std::to_string(n) +
                            " exceeds population size N = " +
                            std::to_string(N.value()));
  }
  if (!(n >= 0.0)) {
    throw std::domain_error("sample size must be >= 0");
  }
}

// Endpoints are provably inside [0, 1]; anything past rounding noise is a
// bug in the formula, not something to hide.
inline double clamp_unit(double v, const char* what) {
  if (v < -1e-12 || v > 1.0 + 1e-12) {
    throw std::logic_error(std::string("interval ") + what +
                           " escaped [0, 1] by more than 1e-12: " +
                           std::to_string(v));
  }
  if (v < 0.0) return 0.0;
  if (v > 1.0) return 1.0;
  return v;
}

}  // namespace detail

/// Effective sample size for inference about the population proportion:
/// n (N - 1) / (N - n). Infinite for a census (n = N), n itself when N is
/// infinite.
inline double effective_n_star(double n, PopulationSize N) {
  detail::check_sample_against_population(n, N);
  if (!N.is_finite()) return n;
  const double Nv = N.value();
  if (n == Nv) return kInf;
  return n * (Nv - 1.0) / (Nv - n);
}

/// Effective sample size for inference about the unsampled proportion:
/// n (N - n) / (N - 1). Zero for a census or an empty sample, n itself
/// when N is infinite.
inline double effective_n_double_star(double n, PopulationSize N) {
  detail::check_sample_against_population(n, N);
  if (!N.is_finite()) return n;
  const double Nv = N.value();
  if (n == Nv || n == 0.0) return 0.0;
  if (Nv == 1.0) {
    // interior real n with N = 1 has no meaning (denominator N - 1 = 0)
    throw std::domain_error(
        "effective_n_double_star: 0 < n < N is undefined for N = 1");
  }
  return n * (Nv - n) / (Nv - 1.0);
}

/// Score interval for a proportion given an effective sample size.
///
/// Limit cases are returned exactly: an infinite effective sample size or
/// alpha = 1 collapses to the point [x_bar, x_bar]; a zero effective sample
/// size or alpha = 0 yields the vacuous [0, 1].
inline Interval wilson_core(TailArea alpha, double n_eff, double x_bar) {
  if (!(n_eff >= 0.0)) {
    throw std::domain_error("wilson_core: effective sample size must be >= 0");
  }
  if (!(x_bar >= 0.0 && x_bar <= 1.0)) {
    throw std::domain_error("wilson_core: x_bar must be in [0, 1], got " +
                            std::to_string(x_bar));
  }
  if (std::isinf(n_eff)) return Interval{x_bar, x_bar};
  if (n_eff == 0.0) return Interval{0.0, 1.0};
  const double a = alpha.value();
  if (a == 0.0) return Interval{0.0, 1.0};
  if (a == 1.0) return Interval{x_bar, x_bar};

  const CriticalPoint c = chi_sq_critical(alpha);
  const double denom = n_eff + c.chi_sq;
  // at the proportion extremes one endpoint is exactly 0 or 1
  if (x_bar == 0.0) {
    return Interval{0.0, detail::clamp_unit(c.chi_sq / denom, "upper bound")};
  }
  if (x_bar == 1.0) {
    return Interval{detail::clamp_unit(n_eff / denom, "lower bound"), 1.0};
  }
  const double center = (n_eff * x_bar + 0.5 * c.chi_sq) / denom;
  const double half =
      c.chi / denom * std::sqrt(n_eff * x_bar * (1.0 - x_bar) + 0.25 * c.chi_sq);
  return Interval{detail::clamp_unit(center - half, "lower bound"),
                  detail::clamp_unit(center + half, "upper bound")};
}

/// Confidence interval for the selected target. The population and
/// unsampled targets reduce to the plain interval when N is infinite; a
/// census yields [x_bar, x_bar] for the population proportion and [0, 1]
/// for the unsampled proportion.
inline Interval confidence_interval(Target target, TailArea alpha,
                                    const SampleSummary& sample,
                                    PopulationSize N) {
  switch (target) {
    case Target::Superpopulation:
      detail::check_sample_against_population(sample.n, N);
      return wilson_core(alpha, sample.n, sample.x_bar);
    case Target::Population:
      return wilson_core(alpha, effective_n_star(sample.n, N), sample.x_bar);
    case Target::Unsampled:
      return wilson_core(alpha, effective_n_double_star(sample.n, N),
                         sample.x_bar);
  }
  throw std::logic_error("confidence_interval: unknown target");
}

struct BoundFunctions {
  double lower;
  double upper;
  double width;
};

/// Lower bound, upper bound and width of the score interval. The width is
/// evaluated through its own closed form 2 chi / (n + chi^2) *
/// sqrt(n z + chi^2 / 4) and agrees with upper - lower to rounding.
inline BoundFunctions bound_functions(TailArea alpha, double n_eff,
                                      double x_bar) {
  const Interval ci = wilson_core(alpha, n_eff, x_bar);
  if (std::isinf(n_eff) || alpha.value() == 1.0) {
    return BoundFunctions{ci.lower, ci.upper, 0.0};
  }
  if (n_eff == 0.0 || alpha.value() == 0.0) {
    return BoundFunctions{ci.lower, ci.upper, 1.0};
  }
  const CriticalPoint c = chi_sq_critical(alpha);
  const double width =
      2.0 * c.chi / (n_eff + c.chi_sq) *
      std::sqrt(n_eff * x_bar * (1.0 - x_bar) + 0.25 * c.chi_sq);
  return BoundFunctions{ci.lower, ci.upper, width};
}

/// Single-parameter form of the finite-population intervals. phi_star
/// drives the population-proportion interval, phi_double_star the
/// unsampled-proportion interval. The defining property is
///   n_* = chi^2 / (2 phi_star),   n_** = chi^2 / (2 phi_double_star),
/// which pins the factors to (N - n)/(N - 1) and (N - 1)/(N - n); a
/// variant with N in place of N - 1 circulates but fails that identity
/// and therefore cannot reproduce the main intervals (see tests).
inline double phi_star(double n, double N, TailArea alpha) {
  const CriticalPoint c = chi_sq_critical(alpha);
  return (N - n) / (N - 1.0) * (c.chi_sq / (2.0 * n));
}

inline double phi_double_star(double n, double N, TailArea alpha) {
  const CriticalPoint c = chi_sq_critical(alpha);
  return (N - 1.0) / (N - n) * (c.chi_sq / (2.0 * n));
}

namespace detail {

inline Interval interval_from_phi(double phi, double x_bar) {
  const double denom = 1.0 + 2.0 * phi;
  const double center = (x_bar + phi) / denom;
  const double half =
      std::sqrt(2.0 * phi * x_bar * (1.0 - x_bar) + phi * phi) / denom;
  return Interval{clamp_unit(center - half, "lower bound"),
                  clamp_unit(center + half, "upper bound")};
}

}  // namespace detail

/// Redundant computation route for the finite-population intervals,
/// parameterized by phi alone. Defined for 0 < n < N and 0 < alpha < 1;
/// degenerate inputs belong to confidence_interval, which handles them
/// exactly.
inline Interval phi_form_interval(Target target, TailArea alpha,
                                  const SampleSummary& sample, double N) {
  if (!(N > 1.0) || !std::isfinite(N)) {
    throw std::domain_error("phi_form_interval: N must be finite and > 1");
  }
  if (!(sample.n > 0.0 && sample.n < N)) {
    throw std::domain_error("phi_form_interval: requires 0 < n < N");
  }
  const double a = alpha.value();
  if (!(a > 0.0 && a < 1.0)) {
    throw std::domain_error("phi_form_interval: requires 0 < alpha < 1");
  }
  switch (target) {
    case Target::Population:
      return detail::interval_from_phi(phi_star(sample.n, N, alpha),
                                       sample.x_bar);
    case Target::Unsampled:
      return detail::interval_from_phi(phi_double_star(sample.n, N, alpha),
                                       sample.x_bar);
    case Target::Superpopulation:
      throw std::domain_error(
          "phi_form_interval: defined for the population and unsampled "
          "targets only");
  }
  throw std::logic_error("phi_form_interval: unknown target");
}

}  // namespace propint
