#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "propint/propint.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using Catch::Matchers::WithinAbs;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path();
  const std::string tag = std::to_string(++counter);
  const fs::path out = dir / ("propint_cli_out_" + tag);
  const fs::path err = dir / ("propint_cli_err_" + tag);
  std::string cmd = env_prefix;
  if (!cmd.empty()) cmd += " ";
  cmd += "\"" PROPINT_CLI_BIN "\" " + args + " >" + out.string() + " 2>" +
         err.string();
  const int status = std::system(cmd.c_str());
  CliResult r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  fs::remove(out);
  fs::remove(err);
  return r;
}

fs::path write_data_file(const std::string& content) {
  static int counter = 0;
  const fs::path p =
      fs::temp_directory_path() / ("propint_data_" + std::to_string(++counter) + ".txt");
  std::ofstream f(p);
  f << content;
  return p;
}

}  // namespace

TEST_CASE("ci reproduces the finite-population worked example") {
  const auto pop = run(
      "ci --alpha 0.05 --n 60 --successes 39 --population-size 200 "
      "--target population --format json");
  REQUIRE(pop.code == 0);
  const json j = json::parse(pop.out);
  CHECK_THAT(j["lower"].get<double>(), WithinAbs(0.544301577788208, 1e-7));
  CHECK_THAT(j["upper"].get<double>(), WithinAbs(0.742768160810678, 1e-7));
  CHECK_THAT(j["effective_n"].get<double>(), WithinAbs(85.28571428571429, 1e-9));
  CHECK(j["x_bar"].get<double>() == 0.65);
  CHECK(j["n"].get<std::int64_t>() == 60);
  CHECK(j["population_size"].get<std::int64_t>() == 200);

  // the CLI does no arithmetic of its own: bit-for-bit equal to the library
  const propint::Interval lib = propint::confidence_interval(
      propint::Target::Population, propint::TailArea(0.05),
      propint::SampleSummary::from_successes(60, 39),
      propint::PopulationSize::finite(200));
  CHECK(j["lower"].get<double>() == lib.lower);
  CHECK(j["upper"].get<double>() == lib.upper);

  const auto uns = run(
      "ci --alpha 0.05 --n 60 --successes 39 --population-size 200 "
      "--target unsampled --format json");
  REQUIRE(uns.code == 0);
  const json ju = json::parse(uns.out);
  CHECK_THAT(ju["lower"].get<double>(), WithinAbs(0.49916421640973, 1e-7));
  CHECK_THAT(ju["upper"].get<double>(), WithinAbs(0.775811359434426, 1e-7));
}

TEST_CASE("ci text output carries the headline fields") {
  const auto r = run(
      "ci --alpha 0.05 --n 60 --successes 39 --population-size 200 "
      "--target population");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("95.00%") != std::string::npos);
  CHECK(r.out.find("population size 200") != std::string::npos);
  CHECK(r.out.find("n = 60") != std::string::npos);
  CHECK(r.out.find("0.6500") != std::string::npos);
  CHECK(r.out.find("0.544302") != std::string::npos);
  CHECK(r.out.find("0.742768") != std::string::npos);
}

TEST_CASE("ci defaults to the plain interval for an infinite population") {
  const auto r = run("ci --n 60 --successes 39 --format json");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["target"] == "superpop");
  CHECK(j["population_size"] == "inf");
  CHECK_THAT(j["lower"].get<double>(), WithinAbs(0.5236261884175487, 1e-12));
  CHECK_THAT(j["upper"].get<double>(), WithinAbs(0.7583222559398245, 1e-12));
  CHECK(j["alpha"].get<double>() == 0.05);
}

TEST_CASE("ci with zero successes matches the rule-of-three style bound") {
  const auto r = run("ci --n 10 --successes 0 --format json");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["lower"].get<double>() == 0.0);
  CHECK_THAT(j["upper"].get<double>(), WithinAbs(0.277533, 1e-6));
}

TEST_CASE("ci census output is a point with infinite effective size") {
  const auto r = run(
      "ci --n 200 --successes 141 --population-size 200 --target population "
      "--format json");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["lower"].get<double>() == 0.705);
  CHECK(j["upper"].get<double>() == 0.705);
  CHECK(j["effective_n"] == "inf");
}

TEST_CASE("ci ingests data files") {
  std::string content;
  for (int i = 0; i < 39; ++i) content += "1\n";
  for (int i = 0; i < 21; ++i) content += "0\n";
  const fs::path plain = write_data_file(content);
  const auto r = run("ci --data " + plain.string() +
                     " --population-size 200 --target population --format json");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["n"].get<std::int64_t>() == 60);
  CHECK(j["x_bar"].get<double>() == 0.65);
  CHECK_THAT(j["lower"].get<double>(), WithinAbs(0.544301577788208, 1e-7));

  const fs::path csv = write_data_file("outcome\n" + content);
  const auto rc = run("ci --data " + csv.string() + " --format json");
  REQUIRE(rc.code == 0);
  CHECK(json::parse(rc.out)["n"].get<std::int64_t>() == 60);

  fs::remove(plain);
  fs::remove(csv);
}

TEST_CASE("ci exit codes for bad usage and bad data") {
  CHECK(run("ci --n 60").code == 2);                    // missing successes
  CHECK(run("ci --n 60 --successes 70").code == 2);     // successes > n
  CHECK(run("ci --n 60 --successes 30 --alpha 1.5").code == 2);
  CHECK(run("ci --n 60 --successes 30 --population-size 50").code == 2);
  CHECK(run("ci --n 60 --successes 30 --population-size nonsense").code == 2);
  CHECK(run("").code == 2);                             // no subcommand
  CHECK(run("frobnicate").code == 2);

  const fs::path bad = write_data_file("1\n0\n2\n1\n");
  const auto r = run("ci --data " + bad.string());
  CHECK(r.code == 3);
  CHECK(r.err.find(":3") != std::string::npos);  // names the first bad line
  fs::remove(bad);

  const auto missing = run("ci --data /nonexistent/propint.txt");
  CHECK(missing.code == 3);

  const fs::path both = write_data_file("1\n");
  CHECK(run("ci --data " + both.string() + " --n 1 --successes 1").code == 2);
  fs::remove(both);
}

TEST_CASE("plan with an assumed proportion") {
  const auto r = run("plan --width 0.2 --alpha 0.05 --assumed-prop 0 --ceil --format json");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK_THAT(j["n_required"].get<double>(), WithinAbs(15.365835, 1e-5));
  CHECK(j["n_required_practical"].get<std::int64_t>() == 16);

  const auto tiny = run("plan --width 0.99 --alpha 0.05 --assumed-prop 0.5 --ceil --format json");
  REQUIRE(tiny.code == 0);
  const json jt = json::parse(tiny.out);
  CHECK(jt["n_required"].get<double>() > 0.0);
  CHECK(jt["n_required"].get<double>() < 1.0);
  CHECK(static_cast<double>(jt["n_required_practical"].get<std::int64_t>()) >=
        jt["n_required"].get<double>());
}

TEST_CASE("plan conservative variants") {
  const auto exact = run("plan --width 0.5 --alpha 0.05 --conservative exact --ceil --format json");
  REQUIRE(exact.code == 0);
  const json je = json::parse(exact.out);
  CHECK_THAT(je["conservative_exact"].get<double>(), WithinAbs(11.524376, 1e-5));
  CHECK(je["conservative_exact_practical"].get<std::int64_t>() == 12);

  // with no assumed proportion, both variants are reported
  const auto both = run("plan --width 0.2 --alpha 0.05 --format json");
  REQUIRE(both.code == 0);
  const json jb = json::parse(both.out);
  CHECK_THAT(jb["conservative_exact"].get<double>(), WithinAbs(92.195012, 1e-4));
  CHECK_THAT(jb["conservative_paper_theorem14"].get<double>(),
             WithinAbs(3.841459, 5e-6));

  CHECK(run("plan --width 1.2 --alpha 0.05").code == 2);
  CHECK(run("plan --width 0 --alpha 0.05").code == 2);
  CHECK(run("plan --width 0.2 --assumed-prop 0.5 --conservative exact").code == 2);
}

TEST_CASE("isoquant inverts the worked example") {
  const auto r = run("isoquant --effective-n 85.2857142857 --m-range 140:140:1 --format json");
  REQUIRE(r.code == 0);
  const json rows = json::parse(r.out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0]["m"].get<double>() == 140.0);
  CHECK_THAT(rows[0]["n"].get<double>(), WithinAbs(60.0, 1e-6));
}

TEST_CASE("isoquant emits an increasing concave column") {
  const auto r = run("isoquant --effective-n 50 --m-range 10:1000:10 --format json");
  REQUIRE(r.code == 0);
  const json rows = json::parse(r.out);
  REQUIRE(rows.size() == 100);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i]["n"].get<double>() > rows[i - 1]["n"].get<double>());
    if (i >= 2) {
      const double second = rows[i]["n"].get<double>() -
                            2.0 * rows[i - 1]["n"].get<double>() +
                            rows[i - 2]["n"].get<double>();
      CHECK(second < 0.0);
    }
  }

  const auto zero = run("isoquant --effective-n 0 --m-range 1:10:1 --format json");
  REQUIRE(zero.code == 0);
  for (const auto& row : json::parse(zero.out)) {
    CHECK(row["n"].get<double>() == 0.0);
  }

  CHECK(run("isoquant --effective-n 50 --m-range 10:5:1").code == 2);
  CHECK(run("isoquant --effective-n 50 --m-range 0.5:10:1").code == 2);
  CHECK(run("isoquant --effective-n 50 --m-range 1:10:0").code == 2);
  CHECK(run("isoquant --effective-n 50 --m-range nonsense").code == 2);
}

TEST_CASE("coverage exact mode matches the library") {
  const auto r = run("coverage --mode exact --theta 0.5 --n 30 --alpha 0.05 --format json");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  const auto lib = propint::exact_coverage_superpop(propint::TailArea(0.05), 30, 0.5);
  CHECK(j["coverage"].get<double>() == lib.coverage);
  CHECK(j["reps_or_outcomes"].get<std::int64_t>() == 31);
  CHECK(j["standard_error"].get<double>() == 0.0);

  const auto census = run(
      "coverage --mode exact --n 50 --population-size 50 "
      "--successes-in-population 20 --target unsampled --format json");
  REQUIRE(census.code == 0);
  CHECK(json::parse(census.out)["coverage"].get<double>() == 1.0);
}

TEST_CASE("coverage exact mode enforces the enumeration budget") {
  const auto big_n = run("coverage --mode exact --theta 0.5 --n 200000 --format json");
  CHECK(big_n.code == 2);
  CHECK(big_n.err.find("mc") != std::string::npos);
  const auto big_pop = run(
      "coverage --mode exact --n 30 --population-size 6000 "
      "--successes-in-population 100 --target population --format json");
  CHECK(big_pop.code == 2);
  CHECK(big_pop.err.find("mc") != std::string::npos);
  // finite exact mode needs the population success count
  CHECK(run("coverage --mode exact --n 30 --population-size 200 "
            "--target population --theta 0.5").code == 2);
}

TEST_CASE("coverage mc mode is reproducible and seed-driven") {
  const std::string args =
      "coverage --mode mc --theta 0.5 --n 30 --alpha 0.05 --reps 10000 "
      "--seed 42 --format json";
  const auto first = run(args);
  const auto second = run(args);
  REQUIRE(first.code == 0);
  CHECK(first.out == second.out);

  const json j = json::parse(first.out);
  CHECK(j["seed"].get<std::uint64_t>() == 42);
  CHECK(j["reps_or_outcomes"].get<std::int64_t>() == 10000);
  CHECK(j["coverage"].get<double>() > 0.9);

  // explicit worker counts do not change the result
  const auto w1 = run(args + " --workers 1");
  const auto w3 = run(args + " --workers 3");
  CHECK(json::parse(w1.out)["coverage"] == json::parse(w3.out)["coverage"]);

  const auto single = run("coverage --mode mc --theta 0.4 --n 10 --reps 1 --seed 7 --format json");
  REQUIRE(single.code == 0);
  const double c = json::parse(single.out)["coverage"].get<double>();
  CHECK((c == 0.0 || c == 1.0));
}

TEST_CASE("PROPINT_SEED applies only when --seed is absent") {
  const std::string base =
      "coverage --mode mc --theta 0.5 --n 30 --reps 2000 --format json";
  const auto flagged = run(base + " --seed 99");
  const auto env_only = run(base, "PROPINT_SEED=99");
  REQUIRE(flagged.code == 0);
  REQUIRE(env_only.code == 0);
  CHECK(flagged.out == env_only.out);

  const auto flag_wins = run(base + " --seed 42", "PROPINT_SEED=99");
  const auto plain42 = run(base + " --seed 42");
  CHECK(flag_wins.out == plain42.out);
  CHECK(flag_wins.out != env_only.out);

  CHECK(run(base, "PROPINT_SEED=notanumber").code == 2);
}

TEST_CASE("json output round-trips and csv is well formed") {
  const auto r = run(
      "ci --n 60 --successes 39 --population-size 200 --target population "
      "--format json");
  REQUIRE(r.code == 0);
  const json parsed = json::parse(r.out);
  CHECK(json::parse(parsed.dump()).dump() == parsed.dump());
  const std::vector<std::string> expected_keys = {
      "target", "alpha", "n", "population_size", "x_bar",
      "lower",  "upper", "width", "effective_n"};
  std::size_t found = 0;
  for (const auto& k : expected_keys) {
    if (parsed.contains(k)) ++found;
  }
  CHECK(found == expected_keys.size());

  const auto c = run(
      "ci --n 60 --successes 39 --population-size 200 --target population "
      "--format csv");
  REQUIRE(c.code == 0);
  std::istringstream lines(c.out);
  std::string header, row;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row));
  const auto count_fields = [](const std::string& s) {
    return 1 + std::count(s.begin(), s.end(), ',');
  };
  CHECK(count_fields(header) == count_fields(row));
  CHECK(header.find("lower") != std::string::npos);
  // csv doubles parse back to the library value exactly
  const auto pos = header.find("lower");
  std::size_t field_index = std::count(header.begin(), header.begin() + static_cast<long>(pos), ',');
  std::istringstream row_in(row);
  std::string cell;
  for (std::size_t i = 0; i <= field_index; ++i) std::getline(row_in, cell, ',');
  const propint::Interval lib = propint::confidence_interval(
      propint::Target::Population, propint::TailArea(0.05),
      propint::SampleSummary::from_successes(60, 39),
      propint::PopulationSize::finite(200));
  CHECK(std::stod(cell) == lib.lower);
}
