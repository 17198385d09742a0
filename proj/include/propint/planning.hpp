#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "propint/intervals.hpp"
#include "propint/quantiles.hpp"
#include "propint/types.hpp"

namespace propint {

namespace detail {

inline void check_open_width(double w) {
  if (!(w > 0.0 && w < 1.0)) {
    throw std::domain_error("target width must be in (0, 1), got " +
                            std::to_string(w));
  }
}

inline void check_open_alpha(TailArea alpha) {
  const double a = alpha.value();
  if (!(a > 0.0 && a < 1.0)) {
    throw std::domain_error("alpha must be in (0, 1) for planning queries");
  }
}

}  // namespace detail

/// Smallest n >= 0 whose infinite-population interval width at sample
/// proportion x_bar is <= w. Closed form: with z = x_bar (1 - x_bar),
///   n = chi^2 / w^2 * (sqrt(w^2 (1 - 4z) + 4 z^2) - w^2 + 2z).
inline double required_sample_size(double w, TailArea alpha, double x_bar) {
  detail::check_open_width(w);
  detail::check_open_alpha(alpha);
  if (!(x_bar >= 0.0 && x_bar <= 1.0)) {
    throw std::domain_error("assumed proportion must be in [0, 1]");
  }
  const double c2 = chi_sq_critical(alpha).chi_sq;
  const double z = x_bar * (1.0 - x_bar);
  const double w2 = w * w;
  const double disc = w2 * (1.0 - 4.0 * z) + 4.0 * z * z;
  return c2 / w2 * (std::sqrt(disc) - w2 + 2.0 * z);
}

/// Sample size sufficient for width <= w whatever the sample proportion
/// turns out to be: the supremum of required_sample_size over x_bar,
/// attained at x_bar = 1/2. Equals chi^2 (1 - w^2) / w^2.
inline double conservative_sample_size_exact(double w, TailArea alpha) {
  detail::check_open_width(w);
  detail::check_open_alpha(alpha);
  const double c2 = chi_sq_critical(alpha).chi_sq;
  return c2 * (1.0 - w * w) / (w * w);
}

/// The capped conservative form chi^2 (1/2 - |w^2 - 1/2|) / w^2: constant
/// at chi^2 for w <= 1/sqrt(2), and equal to the exact worst case above
/// that. For w < 1/sqrt(2) it understates the exact worst case, so plans
/// built on it may miss the width target; it is provided for reporting
/// alongside the exact value.
inline double conservative_sample_size_capped(double w, TailArea alpha) {
  detail::check_open_width(w);
  detail::check_open_alpha(alpha);
  const double c2 = chi_sq_critical(alpha).chi_sq;
  const double w2 = w * w;
  if (w2 <= 0.5) return c2;
  return c2 * (1.0 - w2) / w2;
}

struct SampleSizeBounds {
  double lower;        // requirement at x_bar in {0, 1}: chi^2 (1 - w) / w
  double upper_exact;  // requirement at x_bar = 1/2
};

/// Range of required_sample_size over all assumed proportions.
inline SampleSizeBounds required_sample_size_bounds(double w, TailArea alpha) {
  detail::check_open_width(w);
  detail::check_open_alpha(alpha);
  const double c2 = chi_sq_critical(alpha).chi_sq;
  return SampleSizeBounds{c2 * (1.0 - w) / w,
                          conservative_sample_size_exact(w, alpha)};
}

/// Sample size n that keeps the population-proportion effective sample
/// size at n_star_target when the unsampled group has size m, i.e. the
/// positive root of n (n + m - 1) / m = n_star_target:
///   n = (sqrt((m - 1)^2 + 4 t m) - (m - 1)) / 2,
/// evaluated in conjugate form for stability at large m.
inline double isoquant_sample_size(double m, double n_star_target) {
  if (!(m >= 1.0)) {
    throw std::domain_error("isoquant_sample_size: m must be >= 1");
  }
  if (!(n_star_target >= 0.0)) {
    throw std::domain_error(
        "isoquant_sample_size: effective size target must be >= 0");
  }
  const double t = n_star_target;
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return kInf;
  const double b = m - 1.0;
  return 2.0 * t * m / (std::sqrt(b * b + 4.0 * t * m) + b);
}

/// Greatest lower bound of the unsampled-proportion interval width over
/// all real 0 <= n <= N and all x_bar: chi^2 / (sup n_** + chi^2) with
/// sup n_** = N^2 / (4 (N - 1)), attained at n = N/2, x_bar in {0, 1}.
inline double min_width_unsampled(TailArea alpha, double N) {
  detail::check_open_alpha(alpha);
  if (!(N >= 1.0)) throw std::domain_error("min_width_unsampled: N must be >= 1");
  const double c2 = chi_sq_critical(alpha).chi_sq;
  if (N == 1.0) return 1.0;  // only n in {0, 1} exist; both give width 1
  const double m_max = N * N / (4.0 * (N - 1.0));
  return c2 / (m_max + c2);
}

/// Large-N form of the same floor, chi^2 / (N/4 + chi^2). It replaces
/// sup n_** by N/4 and therefore sits slightly above the attainable
/// minimum for every finite N >= 2; kept for comparison and reporting.
inline double min_width_unsampled_asymptotic(TailArea alpha, double N) {
  detail::check_open_alpha(alpha);
  if (!(N >= 1.0)) {
    throw std::domain_error("min_width_unsampled_asymptotic: N must be >= 1");
  }
  const double c2 = chi_sq_critical(alpha).chi_sq;
  return c2 / (0.25 * N + c2);
}

struct WidthBounds {
  double min;  // at x_bar in {0, 1}: chi^2 / (n + chi^2)
  double max;  // at x_bar = 1/2:     chi / sqrt(n + chi^2)
};

/// Width range of the infinite-population interval over x_bar, for fixed
/// alpha and n.
inline WidthBounds width_bounds_infinite(TailArea alpha, double n) {
  if (!(n >= 0.0)) throw std::domain_error("width_bounds_infinite: n must be >= 0");
  const double a = alpha.value();
  if (a == 0.0) return WidthBounds{1.0, 1.0};
  if (a == 1.0) return WidthBounds{0.0, 0.0};
  const CriticalPoint c = chi_sq_critical(alpha);
  if (n == 0.0) return WidthBounds{1.0, 1.0};
  return WidthBounds{c.chi_sq / (n + c.chi_sq), c.chi / std::sqrt(n + c.chi_sq)};
}

/// Integer sample size for field use: smallest integer >= n_real.
inline std::int64_t practical_sample_size(double n_real) {
  if (!std::isfinite(n_real) || n_real < 0.0) {
    throw std::domain_error(
        "practical_sample_size: requires a finite non-negative value");
  }
  const double c = std::ceil(n_real);
  if (c > 9.2e18) {
    throw std::domain_error("practical_sample_size: value too large");
  }
  return static_cast<std::int64_t>(c);
}

/// Smallest n in [0, N] achieving width <= w for a finite-population
/// target, found by bisection on the width function. The unsampled width
/// is U-shaped in n with its minimum at n = N/2, so the search runs on
/// [0, N/2] and fails (nullopt) when w is below the attainable floor.
inline std::optional<double> required_sample_size_finite(Target target,
                                                         double w,
                                                         TailArea alpha,
                                                         double N,
                                                         double x_bar) {
  detail::check_open_width(w);
  detail::check_open_alpha(alpha);
  if (!(N >= 1.0) || !std::isfinite(N)) {
    throw std::domain_error("required_sample_size_finite: N must be finite, >= 1");
  }
  if (!(x_bar >= 0.0 && x_bar <= 1.0)) {
    throw std::domain_error("assumed proportion must be in [0, 1]");
  }
  const PopulationSize pop = PopulationSize::finite(N);
  auto width_at = [&](double n) {
    const double n_eff = target == Target::Population
                             ? effective_n_star(n, pop)
                             : effective_n_double_star(n, pop);
    return bound_functions(alpha, n_eff, x_bar).width;
  };

  double hi;
  switch (target) {
    case Target::Population:
      hi = N;  // census gives width 0, so a solution always exists
      break;
    case Target::Unsampled:
      hi = 0.5 * N;
      if (N == 1.0 || width_at(hi) > w) return std::nullopt;
      break;
    case Target::Superpopulation:
      throw std::domain_error(
          "required_sample_size_finite: use required_sample_size for the "
          "superpopulation target");
    default:
      throw std::logic_error("required_sample_size_finite: unknown target");
  }

  if (width_at(0.0) <= w) return 0.0;
  double lo = 0.0;  // width > w here; width <= w at hi
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (width_at(mid) <= w ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace propint
