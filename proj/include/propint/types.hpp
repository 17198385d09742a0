#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace propint {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Upper tail area of the two-sided test, alpha in [0, 1].
/// alpha = 0.05 corresponds to a 95% confidence level.
class TailArea {
 public:
  explicit TailArea(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw std::domain_error("TailArea: alpha must be in [0, 1], got " +
                              std::to_string(alpha));
    }
  }
  double value() const { return alpha_; }

 private:
  double alpha_;
};

/// Critical point of the one-degree-of-freedom chi-squared distribution.
/// chi_sq is +infinity exactly when alpha = 0.
struct CriticalPoint {
  double chi_sq;
  double chi;
};

/// Which proportion the interval targets.
enum class Target {
  Superpopulation,  // the generating success probability
  Population,       // the realized proportion among all N members
  Unsampled,        // the proportion among the N - n members not sampled
};

/// Population size: a finite real N >= 1 or infinite.
class PopulationSize {
 public:
  static PopulationSize infinite() { return PopulationSize(kInf); }

  static PopulationSize finite(double n) {
    if (!(n >= 1.0) || !std::isfinite(n)) {
      throw std::domain_error(
          "PopulationSize: finite size must satisfy N >= 1, got " +
          std::to_string(n));
    }
    return PopulationSize(n);
  }

  bool is_finite() const { return std::isfinite(value_); }
  double value() const { return value_; }

 private:
  explicit PopulationSize(double v) : value_(v) {}
  double value_;
};

/// Sample size and sample proportion. n is real-valued in the library
/// (front ends may restrict to integers). If the summary was built from a
/// success count, the count is retained.
struct SampleSummary {
  double n = 0.0;
  double x_bar = 0.0;
  std::optional<double> successes;

  static SampleSummary from_proportion(double n, double x_bar) {
    check_n(n);
    if (!(x_bar >= 0.0 && x_bar <= 1.0)) {
      throw std::domain_error("SampleSummary: proportion must be in [0, 1], got " +
                              std::to_string(x_bar));
    }
    return SampleSummary{n, x_bar, std::nullopt};
  }

  static SampleSummary from_successes(double n, double successes) {
    check_n(n);
    if (!(successes >= 0.0 && successes <= n)) {
      throw std::domain_error(
          "SampleSummary: success count must be in [0, n], got " +
          std::to_string(successes));
    }
    // With no observations the proportion is arbitrary; use 0.
    const double x_bar = n > 0.0 ? successes / n : 0.0;
    return SampleSummary{n, x_bar, successes};
  }

  static SampleSummary from_all(double n, double x_bar, double successes) {
    SampleSummary s = from_proportion(n, x_bar);
    if (!(successes >= 0.0 && successes <= n)) {
      throw std::domain_error("SampleSummary: success count out of range");
    }
    // consistency of the redundant fields, scaled so large n does not
    // trip over representation error of successes/n
    if (std::fabs(x_bar * n - successes) > 1e-12 * std::max(1.0, n)) {
      throw std::domain_error(
          "SampleSummary: x_bar * n does not match the success count");
    }
    s.successes = successes;
    return s;
  }

 private:
  static void check_n(double n) {
    if (!(n >= 0.0) || !std::isfinite(n)) {
      throw std::domain_error("SampleSummary: n must be finite and >= 0, got " +
                              std::to_string(n));
    }
  }
};

/// Closed interval [lower, upper], always a subset of [0, 1].
struct Interval {
  double lower = 0.0;
  double upper = 1.0;

  double width() const { return upper - lower; }
  bool contains(double t) const { return lower <= t && t <= upper; }
};

}  // namespace propint
