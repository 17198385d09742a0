#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "propint/intervals.hpp"
#include "propint/rng.hpp"
#include "propint/types.hpp"

namespace propint {

namespace detail {

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

/// Binomial(n, theta) probabilities for k = 0..n. Anchored at the mode and
/// spread outward by the term ratio
///   p(k+1) / p(k) = (n - k) / (k + 1) * theta / (1 - theta),
/// then normalized by the accumulated total, which keeps every term stable
/// with no underflowing start value and no large log-gamma cancellations.
inline std::vector<double> binomial_pmf(std::int64_t n, double theta) {
  if (n < 0) throw std::domain_error("binomial_pmf: n must be >= 0");
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::domain_error("binomial_pmf: theta must be in [0, 1]");
  }
  std::vector<double> mass(static_cast<std::size_t>(n) + 1, 0.0);
  if (theta == 0.0) {
    mass[0] = 1.0;
    return mass;
  }
  if (theta == 1.0) {
    mass[static_cast<std::size_t>(n)] = 1.0;
    return mass;
  }
  const double odds = theta / (1.0 - theta);
  std::int64_t mode = static_cast<std::int64_t>(
      std::floor((static_cast<double>(n) + 1.0) * theta));
  if (mode > n) mode = n;
  mass[static_cast<std::size_t>(mode)] = 1.0;
  for (std::int64_t k = mode; k < n; ++k) {
    const double up = mass[static_cast<std::size_t>(k)] *
                      (static_cast<double>(n - k) /
                       static_cast<double>(k + 1)) * odds;
    mass[static_cast<std::size_t>(k + 1)] = up;
    if (up == 0.0) break;
  }
  for (std::int64_t k = mode; k > 0; --k) {
    const double down = mass[static_cast<std::size_t>(k)] *
                        (static_cast<double>(k) /
                         (static_cast<double>(n - k + 1) * odds));
    mass[static_cast<std::size_t>(k - 1)] = down;
    if (down == 0.0) break;
  }
  detail::KahanSum total;
  for (double m : mass) total.add(m);
  for (double& m : mass) m /= total.sum;
  return mass;
}

struct HypergeometricPmf {
  std::int64_t k_min = 0;  // mass[i] is the probability of k_min + i
  std::vector<double> mass;
};

/// Hypergeometric probabilities for the number of successes in a sample of
/// n from a population of N containing K successes, over the full support.
/// Same mode-anchored ratio recurrence as binomial_pmf, with
///   p(k+1) / p(k) = (K - k)(n - k) / ((k + 1)(N - K - n + k + 1)).
inline HypergeometricPmf hypergeometric_pmf(std::int64_t N, std::int64_t K,
                                            std::int64_t n) {
  if (N < 0 || K < 0 || K > N || n < 0 || n > N) {
    throw std::domain_error("hypergeometric_pmf: requires 0 <= K <= N, 0 <= n <= N");
  }
  const std::int64_t k_min = std::max<std::int64_t>(0, n - (N - K));
  const std::int64_t k_max = std::min(n, K);
  const std::size_t len = static_cast<std::size_t>(k_max - k_min) + 1;
  HypergeometricPmf out{k_min, std::vector<double>(len, 0.0)};
  auto ratio = [&](std::int64_t k) {
    return static_cast<double>(K - k) * static_cast<double>(n - k) /
           (static_cast<double>(k + 1) * static_cast<double>(N - K - n + k + 1));
  };
  std::int64_t mode = static_cast<std::int64_t>(std::floor(
      (static_cast<double>(n) + 1.0) * (static_cast<double>(K) + 1.0) /
      (static_cast<double>(N) + 2.0)));
  if (mode < k_min) mode = k_min;
  if (mode > k_max) mode = k_max;
  out.mass[static_cast<std::size_t>(mode - k_min)] = 1.0;
  for (std::int64_t k = mode; k < k_max; ++k) {
    const double up = out.mass[static_cast<std::size_t>(k - k_min)] * ratio(k);
    out.mass[static_cast<std::size_t>(k + 1 - k_min)] = up;
    if (up == 0.0) break;
  }
  for (std::int64_t k = mode; k > k_min; --k) {
    const double down =
        out.mass[static_cast<std::size_t>(k - k_min)] / ratio(k - 1);
    out.mass[static_cast<std::size_t>(k - 1 - k_min)] = down;
    if (down == 0.0) break;
  }
  detail::KahanSum total;
  for (double m : out.mass) total.add(m);
  for (double& m : out.mass) m /= total.sum;
  return out;
}

enum class CoverageMode { Exact, MonteCarlo };

struct CoverageReport {
  double coverage = 0.0;
  std::int64_t reps_or_outcomes = 0;
  double standard_error = 0.0;  // 0 in exact mode
  CoverageMode mode = CoverageMode::Exact;
  Target truth_tracked = Target::Superpopulation;
};

/// Exact coverage of the infinite-population interval at level alpha for
/// sample size n, when the data are Binomial(n, theta): the pmf mass of
/// outcomes k whose interval contains theta. alpha = 1 is accepted (point
/// interval, covers only when k/n equals theta exactly).
inline CoverageReport exact_coverage_superpop(TailArea alpha, std::int64_t n,
                                              double theta) {
  if (n < 1 || n > 100000) {
    throw std::domain_error("exact_coverage_superpop: n must be in [1, 1e5]");
  }
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::domain_error("exact_coverage_superpop: theta must be in [0, 1]");
  }
  if (alpha.value() == 0.0) {
    throw std::domain_error("exact_coverage_superpop: alpha must be positive");
  }
  const std::vector<double> pmf = binomial_pmf(n, theta);
  detail::KahanSum covered;
  for (std::int64_t k = 0; k <= n; ++k) {
    const double x_bar = static_cast<double>(k) / static_cast<double>(n);
    if (wilson_core(alpha, static_cast<double>(n), x_bar).contains(theta)) {
      covered.add(pmf[static_cast<std::size_t>(k)]);
    }
  }
  return CoverageReport{covered.sum, n + 1, 0.0, CoverageMode::Exact,
                        Target::Superpopulation};
}

/// Exact coverage of a finite-population interval when the population of
/// size N holds exactly K successes and the n-sample success count is
/// hypergeometric. Truth is K/N for the population target and
/// (K - k)/(N - n) for the unsampled target; a census makes the unsampled
/// truth vacuous and every outcome counts as covered (the interval is
/// [0, 1]).
inline CoverageReport exact_coverage_finite(TailArea alpha, std::int64_t n,
                                            std::int64_t N, std::int64_t K,
                                            Target target) {
  if (N < 1 || N > 5000) {
    throw std::domain_error("exact_coverage_finite: N must be in [1, 5000]");
  }
  if (K < 0 || K > N) {
    throw std::domain_error("exact_coverage_finite: K must be in [0, N]");
  }
  if (n < 1 || n > N) {
    throw std::domain_error("exact_coverage_finite: n must be in [1, N]");
  }
  if (target == Target::Superpopulation) {
    throw std::domain_error(
        "exact_coverage_finite: superpopulation truth is not determined by "
        "K; use exact_coverage_superpop");
  }
  if (alpha.value() == 0.0) {
    throw std::domain_error("exact_coverage_finite: alpha must be positive");
  }
  const HypergeometricPmf pmf = hypergeometric_pmf(N, K, n);
  const PopulationSize pop = PopulationSize::finite(static_cast<double>(N));
  detail::KahanSum covered;
  for (std::size_t i = 0; i < pmf.mass.size(); ++i) {
    const std::int64_t k = pmf.k_min + static_cast<std::int64_t>(i);
    if (target == Target::Unsampled && n == N) {
      covered.add(pmf.mass[i]);
      continue;
    }
    const double truth =
        target == Target::Population
            ? static_cast<double>(K) / static_cast<double>(N)
            : static_cast<double>(K - k) / static_cast<double>(N - n);
    const SampleSummary sample =
        SampleSummary::from_successes(static_cast<double>(n),
                                      static_cast<double>(k));
    if (confidence_interval(target, alpha, sample, pop).contains(truth)) {
      covered.add(pmf.mass[i]);
    }
  }
  return CoverageReport{covered.sum,
                        static_cast<std::int64_t>(pmf.mass.size()), 0.0,
                        CoverageMode::Exact, target};
}

struct SimulationConfig {
  double theta = 0.5;
  std::int64_t n = 1;
  PopulationSize N = PopulationSize::infinite();
  TailArea alpha{0.05};
  Target target = Target::Superpopulation;
  std::int64_t reps = 10000;
  std::uint64_t seed = 0;
  int workers = 1;  // result is identical for any worker count
};

/// Length-N population of IID Bernoulli(theta) values, reproducible for a
/// fixed seed (replication stream 0 of that seed).
inline std::vector<std::uint8_t> generate_population(double theta,
                                                     std::int64_t N,
                                                     std::uint64_t seed) {
  if (N < 0) throw std::domain_error("generate_population: N must be >= 0");
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::domain_error("generate_population: theta must be in [0, 1]");
  }
  SplitMix64 gen = substream(seed, 0);
  std::vector<std::uint8_t> pop(static_cast<std::size_t>(N));
  for (auto& x : pop) x = gen.next_bernoulli(theta) ? 1 : 0;
  return pop;
}

namespace detail {

// One Monte Carlo replication; index selects the derived stream.
inline bool mc_replication_covered(const SimulationConfig& cfg,
                                   std::uint64_t index) {
  SplitMix64 gen = substream(cfg.seed, index);
  std::int64_t sample_hits = 0;
  double truth;
  if (cfg.N.is_finite()) {
    const std::int64_t N = static_cast<std::int64_t>(cfg.N.value());
    std::int64_t population_hits = 0;
    for (std::int64_t i = 0; i < N; ++i) {
      const bool hit = gen.next_bernoulli(cfg.theta);
      population_hits += hit;
      if (i < cfg.n) sample_hits += hit;
    }
    switch (cfg.target) {
      case Target::Superpopulation:
        truth = cfg.theta;
        break;
      case Target::Population:
        truth = static_cast<double>(population_hits) / static_cast<double>(N);
        break;
      case Target::Unsampled:
        if (cfg.n == N) return true;  // interval is [0, 1]
        truth = static_cast<double>(population_hits - sample_hits) /
                static_cast<double>(N - cfg.n);
        break;
      default:
        throw std::logic_error("mc_replication_covered: unknown target");
    }
  } else {
    for (std::int64_t i = 0; i < cfg.n; ++i) {
      sample_hits += gen.next_bernoulli(cfg.theta);
    }
    truth = cfg.theta;
  }
  const SampleSummary sample = SampleSummary::from_successes(
      static_cast<double>(cfg.n), static_cast<double>(sample_hits));
  return confidence_interval(cfg.target, cfg.alpha, sample, cfg.N)
      .contains(truth);
}

}  // namespace detail

/// Monte Carlo coverage estimate. Each replication draws a fresh
/// population (finite N) or a fresh sample (infinite N) from its own
/// derived stream, so the report is bit-identical for a given seed no
/// matter how the replications are split across workers.
inline CoverageReport mc_coverage(const SimulationConfig& cfg) {
  if (cfg.reps < 1) throw std::domain_error("mc_coverage: reps must be >= 1");
  if (cfg.n < 1) throw std::domain_error("mc_coverage: n must be >= 1");
  if (cfg.N.is_finite() && static_cast<double>(cfg.n) > cfg.N.value()) {
    throw std::domain_error("mc_coverage: n must not exceed N");
  }
  if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0)) {
    throw std::domain_error("mc_coverage: theta must be in [0, 1]");
  }
  const std::int64_t reps = cfg.reps;
  int workers = cfg.workers < 1 ? 1 : cfg.workers;
  if (static_cast<std::int64_t>(workers) > reps) {
    workers = static_cast<int>(reps);
  }

  std::int64_t covered = 0;
  if (workers == 1) {
    for (std::int64_t i = 0; i < reps; ++i) {
      covered += detail::mc_replication_covered(cfg, static_cast<std::uint64_t>(i));
    }
  } else {
    std::vector<std::int64_t> partial(static_cast<std::size_t>(workers), 0);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const std::int64_t begin = reps * w / workers;
      const std::int64_t end = reps * (w + 1) / workers;
      pool.emplace_back([&cfg, &partial, w, begin, end] {
        std::int64_t local = 0;
        for (std::int64_t i = begin; i < end; ++i) {
          local += detail::mc_replication_covered(
              cfg, static_cast<std::uint64_t>(i));
        }
        partial[static_cast<std::size_t>(w)] = local;
      });
    }
    for (auto& t : pool) t.join();
    for (std::int64_t p : partial) covered += p;
  }

  const double coverage =
      static_cast<double>(covered) / static_cast<double>(reps);
  const double se =
      std::sqrt(coverage * (1.0 - coverage) / static_cast<double>(reps));
  return CoverageReport{coverage, reps, se, CoverageMode::MonteCarlo,
                        cfg.target};
}

}  // namespace propint
