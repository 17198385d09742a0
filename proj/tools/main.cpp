// propint: score confidence intervals for a binomial proportion with
// finite-population corrections, sample-size planning and coverage checks.
//
// Subcommands: ci, plan, isoquant, coverage. Output formats: text (default),
// json, csv. Exit codes: 0 success, 2 usage or domain error, 3 data
// ingestion error.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "propint/propint.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

// Shortest representation that parses back to the same double.
std::string fmt_full(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return std::string(buf);
}

propint::Target parse_target(const std::string& s) {
  if (s == "superpop") return propint::Target::Superpopulation;
  if (s == "population") return propint::Target::Population;
  return propint::Target::Unsampled;
}

std::string target_token(propint::Target t) {
  switch (t) {
    case propint::Target::Superpopulation: return "superpop";
    case propint::Target::Population: return "population";
    case propint::Target::Unsampled: return "unsampled";
  }
  return "?";
}

propint::PopulationSize parse_population_size(const std::string& s) {
  if (s == "inf" || s == "infinite") return propint::PopulationSize::infinite();
  std::int64_t n = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || n < 1) {
    throw std::domain_error(
        "--population-size must be a positive integer or \"inf\", got \"" + s +
        "\"");
  }
  return propint::PopulationSize::finite(static_cast<double>(n));
}

// json value for quantities that may be infinite (JSON has no infinity).
ordered_json json_number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

void emit_csv(const ordered_json& record, std::ostream& out, bool header) {
  bool first = true;
  if (header) {
    for (auto it = record.begin(); it != record.end(); ++it) {
      if (!first) out << ",";
      out << it.key();
      first = false;
    }
    out << "\n";
  }
  first = true;
  for (auto it = record.begin(); it != record.end(); ++it) {
    if (!first) out << ",";
    const auto& v = it.value();
    if (v.is_string()) {
      out << v.get<std::string>();
    } else if (v.is_number_integer()) {
      out << v.get<std::int64_t>();
    } else {
      out << fmt_full(v.get<double>());
    }
    first = false;
  }
  out << "\n";
}

void emit_record(const ordered_json& record, const std::string& format,
                 const std::string& text) {
  if (format == "json") {
    std::cout << record.dump() << "\n";
  } else if (format == "csv") {
    emit_csv(record, std::cout, true);
  } else {
    std::cout << text;
  }
}

void emit_table(const std::vector<ordered_json>& rows, const std::string& format,
                const std::string& text) {
  if (format == "json") {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) arr.push_back(r);
    std::cout << arr.dump() << "\n";
  } else if (format == "csv") {
    bool header = true;
    for (const auto& r : rows) {
      emit_csv(r, std::cout, header);
      header = false;
    }
  } else {
    std::cout << text;
  }
}

struct CiOptions {
  double alpha = 0.05;
  std::int64_t n = -1;
  std::int64_t successes = -1;
  std::string data_path;
  std::string population_size = "inf";
  std::string target = "superpop";
};

int run_ci(const CiOptions& opt, const std::string& format) {
  const propint::TailArea alpha(opt.alpha);
  const propint::Target target = parse_target(opt.target);
  const propint::PopulationSize N = parse_population_size(opt.population_size);

  propint::SampleSummary sample{};
  if (!opt.data_path.empty()) {
    if (opt.n >= 0 || opt.successes >= 0) {
      throw std::domain_error("--data excludes --n/--successes");
    }
    sample = propint::ingest_file(opt.data_path);
  } else {
    if (opt.n < 0 || opt.successes < 0) {
      throw std::domain_error(
          "provide either --data or both --n and --successes");
    }
    sample = propint::SampleSummary::from_successes(
        static_cast<double>(opt.n), static_cast<double>(opt.successes));
  }

  const propint::Interval ci =
      propint::confidence_interval(target, alpha, sample, N);
  double effective_n = sample.n;
  if (target == propint::Target::Population) {
    effective_n = propint::effective_n_star(sample.n, N);
  } else if (target == propint::Target::Unsampled) {
    effective_n = propint::effective_n_double_star(sample.n, N);
  }

  ordered_json record;
  record["target"] = target_token(target);
  record["alpha"] = opt.alpha;
  record["n"] = static_cast<std::int64_t>(sample.n);
  record["population_size"] =
      N.is_finite() ? ordered_json(static_cast<std::int64_t>(N.value()))
                    : ordered_json("inf");
  record["x_bar"] = sample.x_bar;
  record["lower"] = ci.lower;
  record["upper"] = ci.upper;
  record["width"] = ci.width();
  record["effective_n"] = json_number_or_inf(effective_n);

  std::string describe;
  switch (target) {
    case propint::Target::Superpopulation:
      describe = "superpopulation proportion";
      if (N.is_finite()) {
        describe += " (population size " +
                    std::to_string(static_cast<std::int64_t>(N.value())) + ")";
      }
      break;
    case propint::Target::Population:
      describe = N.is_finite()
                     ? "population proportion (population size " +
                           std::to_string(static_cast<std::int64_t>(N.value())) +
                           ")"
                     : "population proportion (infinite population)";
      break;
    case propint::Target::Unsampled:
      describe = N.is_finite()
                     ? "unsampled proportion (unsampled size " +
                           std::to_string(static_cast<std::int64_t>(
                               N.value() - sample.n)) +
                           " of population " +
                           std::to_string(static_cast<std::int64_t>(N.value())) +
                           ")"
                     : "unsampled proportion (infinite population)";
      break;
  }
  std::string text;
  text += fmt("%.2f", 100.0 * (1.0 - opt.alpha)) +
          "% confidence interval for the " + describe + "\n";
  text += "from n = " + std::to_string(static_cast<std::int64_t>(sample.n)) +
          " binary observations, sample proportion = " +
          fmt("%.4f", sample.x_bar) + "\n\n";
  text += "[" + fmt("%.6g", ci.lower) + ", " + fmt("%.6g", ci.upper) + "]\n";

  emit_record(record, format, text);
  return 0;
}

struct PlanOptions {
  double width = 0.0;
  double alpha = 0.05;
  std::optional<double> assumed_prop;
  std::string conservative;  // "", "exact" or "paper"
  bool ceil = false;
};

int run_plan(const PlanOptions& opt, const std::string& format) {
  const propint::TailArea alpha(opt.alpha);
  ordered_json record;
  record["width_target"] = opt.width;
  record["alpha"] = opt.alpha;

  std::string text =
      "target width " + fmt("%.6g", opt.width) + " at " +
      fmt("%.2f", 100.0 * (1.0 - opt.alpha)) + "% confidence\n";

  auto add = [&](const std::string& key, double value,
                 const std::string& label) {
    record[key] = value;
    text += label + ": " + fmt("%.6f", value) + "\n";
    if (opt.ceil) {
      const std::int64_t p = propint::practical_sample_size(value);
      record[key + "_practical"] = p;
      text += label + " (ceiling): " + std::to_string(p) + "\n";
    }
  };

  if (opt.assumed_prop) {
    record["assumed_prop"] = *opt.assumed_prop;
    add("n_required",
        propint::required_sample_size(opt.width, alpha, *opt.assumed_prop),
        "required sample size");
  } else if (opt.conservative == "exact") {
    add("conservative_exact",
        propint::conservative_sample_size_exact(opt.width, alpha),
        "conservative sample size (exact)");
  } else if (opt.conservative == "paper") {
    add("conservative_paper_theorem14",
        propint::conservative_sample_size_capped(opt.width, alpha),
        "conservative sample size (paper_theorem14)");
  } else {
    add("conservative_exact",
        propint::conservative_sample_size_exact(opt.width, alpha),
        "conservative sample size (exact)");
    add("conservative_paper_theorem14",
        propint::conservative_sample_size_capped(opt.width, alpha),
        "conservative sample size (paper_theorem14)");
  }
  emit_record(record, format, text);
  return 0;
}

struct IsoquantOptions {
  double effective_n = 0.0;
  std::string m_range;
};

int run_isoquant(const IsoquantOptions& opt, const std::string& format) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  {
    const auto p1 = opt.m_range.find(':');
    const auto p2 = p1 == std::string::npos ? p1 : opt.m_range.find(':', p1 + 1);
    if (p2 == std::string::npos) {
      throw std::domain_error("--m-range must look like lo:hi:step");
    }
    try {
      lo = std::stod(opt.m_range.substr(0, p1));
      hi = std::stod(opt.m_range.substr(p1 + 1, p2 - p1 - 1));
      step = std::stod(opt.m_range.substr(p2 + 1));
    } catch (const std::exception&) {
      throw std::domain_error("--m-range must hold three numbers, lo:hi:step");
    }
  }
  if (!(lo >= 1.0) || !(step > 0.0) || hi < lo) {
    throw std::domain_error(
        "--m-range requires lo >= 1, step > 0 and hi >= lo");
  }

  std::vector<ordered_json> rows;
  std::string text = "isoquant for effective sample size " +
                     fmt("%.6g", opt.effective_n) + "\nm,n\n";
  for (std::int64_t i = 0;; ++i) {
    const double m = lo + static_cast<double>(i) * step;
    if (m > hi + 1e-9 * step) break;
    const double n = propint::isoquant_sample_size(m, opt.effective_n);
    ordered_json row;
    row["effective_n"] = json_number_or_inf(opt.effective_n);
    row["m"] = m;
    row["n"] = json_number_or_inf(n);
    rows.push_back(std::move(row));
    text += fmt("%.6g", m) + "," + fmt("%.6f", n) + "\n";
  }
  if (rows.empty()) {
    throw std::domain_error("--m-range produced no rows");
  }
  emit_table(rows, format, text);
  return 0;
}

struct CoverageOptions {
  std::string mode = "exact";
  double theta = -1.0;
  std::int64_t n = 0;
  std::string population_size = "inf";
  std::int64_t successes_in_population = -1;
  double alpha = 0.05;
  std::string target = "superpop";
  std::int64_t reps = 100000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
};

int run_coverage(const CoverageOptions& opt, const std::string& format) {
  const propint::TailArea alpha(opt.alpha);
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) {
    throw std::domain_error("coverage: alpha must be in (0, 1)");
  }
  const propint::Target target = parse_target(opt.target);
  const propint::PopulationSize N = parse_population_size(opt.population_size);

  std::uint64_t seed = opt.seed;
  if (!opt.seed_given) {
    if (const char* env = std::getenv("PROPINT_SEED")) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0') {
        throw std::domain_error(
            "PROPINT_SEED must be an unsigned integer, got \"" +
            std::string(env) + "\"");
      }
      seed = v;
    }
  }

  ordered_json record;
  record["mode"] = opt.mode;
  record["target"] = target_token(target);
  record["alpha"] = opt.alpha;
  record["n"] = opt.n;
  record["population_size"] =
      N.is_finite() ? ordered_json(static_cast<std::int64_t>(N.value()))
                    : ordered_json("inf");

  propint::CoverageReport report;
  std::string source_line;
  if (opt.mode == "exact") {
    if (N.is_finite() && N.value() > 5000.0) {
      throw std::domain_error(
          "exact enumeration is limited to N <= 5000; use --mode mc");
    }
    if (opt.n > 100000) {
      throw std::domain_error(
          "exact enumeration is limited to n <= 100000; use --mode mc");
    }
    if (N.is_finite() && target != propint::Target::Superpopulation) {
      if (opt.successes_in_population < 0) {
        throw std::domain_error(
            "exact finite-population coverage needs --successes-in-population");
      }
      record["successes_in_population"] = opt.successes_in_population;
      report = propint::exact_coverage_finite(
          alpha, opt.n, static_cast<std::int64_t>(N.value()),
          opt.successes_in_population, target);
      source_line = "population successes K = " +
                    std::to_string(opt.successes_in_population);
    } else {
      if (opt.theta < 0.0) {
        throw std::domain_error("exact coverage needs --theta");
      }
      record["theta"] = opt.theta;
      report = propint::exact_coverage_superpop(alpha, opt.n, opt.theta);
      source_line = "theta = " + fmt("%.6g", opt.theta);
    }
    record["coverage"] = report.coverage;
    record["reps_or_outcomes"] = report.reps_or_outcomes;
    record["standard_error"] = 0.0;
  } else {
    if (opt.theta < 0.0) {
      throw std::domain_error("monte carlo coverage needs --theta");
    }
    record["theta"] = opt.theta;
    propint::SimulationConfig cfg{
        opt.theta, opt.n, N, alpha, target, opt.reps, seed,
        opt.workers > 0
            ? opt.workers
            : static_cast<int>(
                  std::max(1u, std::min(8u, std::thread::hardware_concurrency())))};
    report = propint::mc_coverage(cfg);
    record["coverage"] = report.coverage;
    record["reps_or_outcomes"] = report.reps_or_outcomes;
    record["standard_error"] = report.standard_error;
    record["seed"] = seed;
    source_line = "theta = " + fmt("%.6g", opt.theta) + ", seed " +
                  std::to_string(seed);
  }

  std::string text;
  text += std::string(opt.mode == "exact" ? "exact" : "monte carlo") +
          " coverage for the " + opt.target + " target\n";
  text += "alpha = " + fmt("%.6g", opt.alpha) + ", n = " +
          std::to_string(opt.n) + ", population size = " +
          (N.is_finite()
               ? std::to_string(static_cast<std::int64_t>(N.value()))
               : std::string("inf")) +
          ", " + source_line + "\n";
  text += "coverage = " + fmt("%.6f", report.coverage);
  if (opt.mode == "exact") {
    text += " over " + std::to_string(report.reps_or_outcomes) + " outcomes\n";
  } else {
    text += " +/- " + fmt("%.6f", report.standard_error) + " (standard error), " +
            std::to_string(report.reps_or_outcomes) + " replications\n";
  }
  emit_record(record, format, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "score confidence intervals for a binomial proportion, with "
      "finite-population corrections, planning tools and coverage checks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format = "text";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}));

  CiOptions ci;
  CLI::App* ci_cmd = app.add_subcommand("ci", "Confidence interval");
  ci_cmd->add_option("--alpha", ci.alpha, "Upper tail area (default 0.05)");
  ci_cmd->add_option("--n", ci.n, "Sample size");
  ci_cmd->add_option("--successes", ci.successes, "Success count");
  ci_cmd->add_option("--data", ci.data_path,
                     "Newline-delimited 0/1 file (single-column CSV allowed)");
  ci_cmd->add_option("--population-size", ci.population_size,
                     "Population size (integer or \"inf\")");
  ci_cmd->add_option("--target", ci.target, "Estimand")
      ->check(CLI::IsMember({"superpop", "population", "unsampled"}));

  PlanOptions plan;
  CLI::App* plan_cmd = app.add_subcommand("plan", "Required sample size");
  plan_cmd->add_option("--width", plan.width, "Target interval width")
      ->required();
  plan_cmd->add_option("--alpha", plan.alpha, "Upper tail area");
  CLI::Option* assumed =
      plan_cmd->add_option("--assumed-prop", plan.assumed_prop,
                           "Assumed sample proportion");
  plan_cmd
      ->add_option("--conservative", plan.conservative,
                   "Conservative variant when no proportion is assumed")
      ->check(CLI::IsMember({"exact", "paper"}))
      ->excludes(assumed);
  plan_cmd->add_flag("--ceil", plan.ceil, "Also report the integer ceiling");

  IsoquantOptions iso;
  CLI::App* iso_cmd =
      app.add_subcommand("isoquant", "Sample size holding accuracy fixed");
  iso_cmd->add_option("--effective-n", iso.effective_n,
                      "Effective sample size to hold")
      ->required();
  iso_cmd->add_option("--m-range", iso.m_range, "Unsampled sizes, lo:hi:step")
      ->required();

  CoverageOptions cov;
  CLI::App* cov_cmd = app.add_subcommand("coverage", "Coverage verification");
  cov_cmd->add_option("--mode", cov.mode, "exact enumeration or monte carlo")
      ->check(CLI::IsMember({"exact", "mc"}));
  cov_cmd->add_option("--theta", cov.theta, "Success probability");
  cov_cmd->add_option("--n", cov.n, "Sample size")->required();
  cov_cmd->add_option("--population-size", cov.population_size,
                      "Population size (integer or \"inf\")");
  cov_cmd->add_option("--successes-in-population", cov.successes_in_population,
                      "Population success count K (exact finite mode)");
  cov_cmd->add_option("--alpha", cov.alpha, "Upper tail area");
  cov_cmd->add_option("--target", cov.target, "Estimand")
      ->check(CLI::IsMember({"superpop", "population", "unsampled"}));
  cov_cmd->add_option("--reps", cov.reps, "Monte carlo replications");
  CLI::Option* seed_opt =
      cov_cmd->add_option("--seed", cov.seed,
                          "RNG seed (PROPINT_SEED applies when omitted)");
  cov_cmd->add_option("--workers", cov.workers,
                      "Worker threads (any count gives identical results)");

  try {
    app.parse(argc, argv);
    cov.seed_given = seed_opt->count() > 0;
    if (ci_cmd->parsed()) return run_ci(ci, format);
    if (plan_cmd->parsed()) return run_plan(plan, format);
    if (iso_cmd->parsed()) return run_isoquant(iso, format);
    if (cov_cmd->parsed()) return run_coverage(cov, format);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const propint::IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
