#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "selftune/errors.hpp"
#include "selftune/harness.hpp"

using namespace selftune;
namespace fs = std::filesystem;

namespace {

// Gearbox weight at the literature design, evaluated in mpmath
// at 30 digits.
constexpr double kLiteratureDesignWeight = 2993.75874804287981;
const std::vector<double> kLiteratureDesign{3.5, 0.7, 17, 7.3, 7.8, 3.34336445, 5.285350625};

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "selftune");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("selftune_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content = "") const {
    const fs::path p = path / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }
  std::string prefix(const std::string& name) const { return (path / name).string(); }
};

const char* kTinyTune =
    "problem = \"sphere\"\n"
    "dimension = 2\n"
    "runs = 3\n"
    "repeats = 2\n"
    "inner_cap = 200\n"
    "meta_population = 4\n"
    "meta_generations = 3\n"
    "master_seed = 42\n";

const char* kTinyGearbox =
    "runs = 2\n"
    "repeats = 2\n"
    "inner_cap = 60\n"
    "meta_population = 3\n"
    "meta_generations = 2\n"
    "master_seed = 5\n";

double objective_line(const std::string& out) {
  std::istringstream in(out);
  std::string key;
  double value = NAN;
  in >> key >> value;
  REQUIRE(key == "objective");
  return value;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (value) ::setenv(kSeedEnvVar, value, 1);
    else ::unsetenv(kSeedEnvVar);
  }
  ~EnvGuard() { ::unsetenv(kSeedEnvVar); }
};

}  // namespace

TEST_CASE("config text parsing") {
  const auto pairs = parse_config_text(
      "# header\n"
      "\n"
      "problem = \"ack#ley\"  # trailing\n"
      "  delta=1e-6\n"
      "frame = unit_box\n");
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].first == "problem");
  CHECK(pairs[0].second == "\"ack#ley\"");
  CHECK(pairs[1].second == "1e-6");
  CHECK(pairs[2].second == "unit_box");
  CHECK_THROWS_AS(parse_config_text("problem\n"), UsageError);
  CHECK_THROWS_AS(parse_config_text("= 3\n"), UsageError);
  CHECK_THROWS_AS(parse_config_text("runs =\n"), UsageError);
  try {
    parse_config_text("a = 1\nbroken\n", "x.cfg");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("x.cfg:2") != std::string::npos);
  }
}

TEST_CASE("apply_setting types") {
  ExperimentConfig c;
  apply_setting(c, "problem", "\"rastrigin\"");
  CHECK(c.problem == "rastrigin");
  apply_setting(c, "problem", "zakharov");
  CHECK(c.problem == "zakharov");
  apply_setting(c, "runs", "20");
  CHECK(c.runs == 20);
  apply_setting(c, "delta", "1e-3");
  CHECK(c.delta == 1e-3);
  apply_setting(c, "gamma_max", "3");
  CHECK(c.gamma_max == 3.0);
  apply_setting(c, "master_seed", "18446744073709551615");
  CHECK(c.master_seed == 18446744073709551615ULL);
  apply_setting(c, "timing", "true");
  CHECK(c.timing);
  apply_setting(c, "frame", "\"problem\"");
  CHECK(c.frame == SearchFrame::problem);
  apply_setting(c, "execution", "serial");
  CHECK(c.execution == Execution::serial);
  CHECK_THROWS_AS(apply_setting(c, "bogus", "1"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "runs", "-1"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "runs", "2.5"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "delta", "\"small\""), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "timing", "1"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "frame", "cube"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "master_seed", "-3"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "runs", "[1]"), UsageError);
  CHECK(config_keys().size() == 26);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.problem = "nosuch";
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.theta_max = 1.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.delta = 0.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.runs = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.gamma_min = 4.0;
  c.gamma_max = 1.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("seed precedence: file < environment < command line") {
  TempDir dir;
  const std::string path = dir.file("c.cfg", "master_seed = 5\nruns = 4\n");
  CHECK(load_config(path, {}, std::nullopt).master_seed == 5);
  CHECK(load_config(path, {}, std::string("7")).master_seed == 7);
  CHECK(load_config(path, {}, std::string("")).master_seed == 5);
  CHECK(load_config(path, {{"master_seed", "9"}}, std::string("7")).master_seed == 9);
  CHECK(load_config(path, {{"runs", "6"}}, std::nullopt).runs == 6);
  CHECK_THROWS_AS(load_config(path, {}, std::string("seven")), UsageError);
  CHECK_THROWS_AS(load_config(dir.prefix("missing.cfg"), {}, std::nullopt), UsageError);
}

TEST_CASE("eval command") {
  CliResult r = cli({"eval", "sphere", "1", "2"});
  CHECK(r.code == 0);
  CHECK(r.out == "objective 5\n");

  r = cli({"eval", "ackley", "0", "0", "0", "0", "0", "0", "0", "0"});
  CHECK(r.code == 0);
  CHECK(std::abs(objective_line(r.out)) <= 1e-12);

  r = cli({"eval", "sphere", "-1", "-2.5"});
  CHECK(r.code == 0);
  CHECK(objective_line(r.out) == 7.25);

  r = cli({"eval", "gearbox", "3.5", "0.7", "17", "7.3", "7.8", "3.34336445", "5.285350625"});
  CHECK(r.code == 0);
  CHECK(std::abs(objective_line(r.out) - kLiteratureDesignWeight) <= 1e-9);
  CHECK(r.out.find("g11 ") != std::string::npos);
  CHECK(r.out.find("g5 ") != std::string::npos);

  CHECK(cli({"eval", "gearbox", "1", "2"}).code == 2);
  CHECK(cli({"eval", "nosuch", "1"}).code == 2);
  CHECK(cli({"eval", "sphere"}).code == 2);
  CHECK(cli({"eval", "sphere", "abc"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("gearbox designs through the report pipeline") {
  const DesignReport d = describe_gearbox_design(kLiteratureDesign);
  CHECK(std::abs(d.raw_objective - kLiteratureDesignWeight) <= 1e-9);
  // Derived constraint oracle: g5 and g6 are violated at this design.
  for (std::size_t i = 0; i < gearbox::kConstraints; ++i) {
    CAPTURE(i);
    CHECK(d.satisfied[i] == (i != 4 && i != 5));
  }
  CHECK_FALSE(d.feasible);
  CHECK(d.penalized_objective > d.raw_objective);

  std::vector<double> fractional = kLiteratureDesign;
  fractional[2] = 17.4;
  CHECK(describe_gearbox_design(fractional).x[2] == 17.0);
  CHECK_THROWS_AS(describe_gearbox_design(std::vector<double>{1, 2}), DimensionError);

  FireflyParams p;
  p.max_iter = 40;
  const GearboxRunDesigns run = gearbox_confirmation_run(p, gearbox::kDefaultPenalty, 3);
  CHECK(run.seed == 3);
  if (run.best_feasible) {
    CHECK(run.best_feasible->feasible);
    CHECK(run.best_penalized.penalized_objective <= run.best_feasible->penalized_objective);
  }
  const GearboxRunDesigns again = gearbox_confirmation_run(p, gearbox::kDefaultPenalty, 3);
  CHECK(again.best_penalized.x == run.best_penalized.x);
}

TEST_CASE("usage and I/O exit codes") {
  TempDir dir;
  const std::string cfg = dir.file("c.cfg", kTinyTune);

  const std::string bad = dir.prefix("bad");
  CHECK(cli({"tune", cfg, "--set", "problem=nosuch", "-o", bad}).code == 2);
  CHECK_FALSE(fs::exists(bad + ".csv"));
  CHECK_FALSE(fs::exists(bad + ".json"));
  CHECK(cli({"tune", cfg, "--set", "runs=0", "-o", bad}).code == 2);
  CHECK(cli({"tune", cfg, "--set", "nokey", "-o", bad}).code == 2);
  CHECK(cli({"tune", cfg, "--seed", "x", "-o", bad}).code == 2);
  CHECK(cli({"tune", dir.prefix("missing.cfg"), "-o", bad}).code == 2);
  CHECK(cli({"tune", dir.file("broken.cfg", "runs 3\n"), "-o", bad}).code == 2);
  CHECK(cli({"bench", cfg, "--set", "theta=1.5", "-o", bad}).code == 2);
  CHECK_FALSE(fs::exists(bad + ".csv"));

  CHECK(cli({"tune", cfg, "-o", dir.prefix("no/such/dir/out")}).code == 3);
  CHECK(cli({"bench", cfg, "-o", dir.prefix("no/such/dir/out")}).code == 3);
}

TEST_CASE("check_report rejects an inconsistent summary") {
  TuningReport report;
  report.per_run = {{0, 1, 1.0, 0.9, 10.0, 0.0}, {1, 2, 2.0, 0.8, 20.0, 0.0}};
  report.summarize();
  CHECK_NOTHROW(check_report(report));
  report.theta.mean += 1e-6;
  CHECK_THROWS_AS(check_report(report), InvariantViolation);
  report.summarize();
  report.per_run[1].run_index = 5;
  CHECK_THROWS_AS(check_report(report), InvariantViolation);
}

TEST_CASE("tune reports: determinism and cross-format consistency") {
  TempDir dir;
  EnvGuard env(nullptr);
  const std::string cfg = dir.file("c.cfg", kTinyTune);
  REQUIRE(cli({"tune", cfg, "-o", dir.prefix("a")}).code == 0);
  REQUIRE(cli({"tune", cfg, "-o", dir.prefix("b")}).code == 0);
  REQUIRE(cli({"tune", cfg, "-o", dir.prefix("s"), "--set", "execution=serial"}).code == 0);
  const std::string csv = slurp(dir.prefix("a") + ".csv");
  const std::string json = slurp(dir.prefix("a") + ".json");
  CHECK(csv == slurp(dir.prefix("b") + ".csv"));
  CHECK(json == slurp(dir.prefix("b") + ".json"));
  CHECK(csv == slurp(dir.prefix("s") + ".csv"));
  CHECK(json == slurp(dir.prefix("s") + ".json"));

  const auto rows = csv_rows(csv);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"run_index", "seed", "gamma_star", "theta_star", "mean_t_delta",
                                            "wall_time_s"});
  const auto j = nlohmann::json::parse(json);
  REQUIRE(j["runs"].size() == 3);
  std::vector<double> t, g, th;
  for (std::size_t r = 0; r < 3; ++r) {
    const auto& row = rows[r + 1];
    const auto& jr = j["runs"][r];
    CHECK(std::stoull(row[0]) == jr["run_index"].get<std::size_t>());
    CHECK(std::stoull(row[1]) == jr["seed"].get<std::uint64_t>());
    CHECK(std::stoull(row[1]) == derive_seed(42, r));
    CHECK(std::abs(std::stod(row[2]) - jr["gamma_star"].get<double>()) <= 1e-12);
    CHECK(std::abs(std::stod(row[3]) - jr["theta_star"].get<double>()) <= 1e-12);
    CHECK(std::abs(std::stod(row[4]) - jr["mean_t_delta"].get<double>()) <= 1e-12);
    CHECK(std::stod(row[5]) == 0.0);
    t.push_back(std::stod(row[4]));
    g.push_back(std::stod(row[2]));
    th.push_back(std::stod(row[3]));
  }
  const auto& s = j["summary"];
  CHECK(s["run_count"] == 3);
  CHECK(std::abs(aggregate_stats(t).mean - s["mean_t_delta"].get<double>()) <= 1e-9);
  CHECK(std::abs(aggregate_stats(t).stddev - s["sigma_t_delta"].get<double>()) <= 1e-9);
  CHECK(std::abs(aggregate_stats(g).mean - s["gamma_mean"].get<double>()) <= 1e-9);
  CHECK(std::abs(aggregate_stats(th).stddev - s["theta_sigma"].get<double>()) <= 1e-9);
  CHECK(j["config"]["master_seed"] == 42);

  {
    EnvGuard seeded("43");
    REQUIRE(cli({"tune", cfg, "-o", dir.prefix("e")}).code == 0);
    CHECK(csv_rows(slurp(dir.prefix("e") + ".csv"))[1][1] == std::to_string(derive_seed(43, 0)));
    REQUIRE(cli({"tune", cfg, "-o", dir.prefix("f"), "--seed", "42"}).code == 0);
    CHECK(slurp(dir.prefix("f") + ".csv") == csv);
  }
}

TEST_CASE("bench and gearbox reports are reproducible") {
  TempDir dir;
  EnvGuard env(nullptr);
  const std::string bench_cfg = dir.file("b.cfg", "problem = sphere\ndimension = 3\nruns = 4\ninner_cap = 300\n");
  REQUIRE(cli({"bench", bench_cfg, "-o", dir.prefix("b1")}).code == 0);
  REQUIRE(cli({"bench", bench_cfg, "-o", dir.prefix("b2")}).code == 0);
  CHECK(slurp(dir.prefix("b1") + ".csv") == slurp(dir.prefix("b2") + ".csv"));
  CHECK(slurp(dir.prefix("b1") + ".json") == slurp(dir.prefix("b2") + ".json"));
  const auto rows = csv_rows(slurp(dir.prefix("b1") + ".csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"run_index", "seed", "t_delta", "converged", "best_f"});
  const auto bj = nlohmann::json::parse(slurp(dir.prefix("b1") + ".json"));
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(std::abs(std::stod(rows[r + 1][4]) - bj["runs"][r]["best_f"].get<double>()) <= 1e-12);
    CHECK(std::stoull(rows[r + 1][2]) == bj["runs"][r]["t_delta"].get<std::size_t>());
  }

  const std::string gear_cfg = dir.file("g.cfg", kTinyGearbox);
  REQUIRE(cli({"gearbox", gear_cfg, "-o", dir.prefix("g1")}).code == 0);
  REQUIRE(cli({"gearbox", gear_cfg, "-o", dir.prefix("g2")}).code == 0);
  CHECK(slurp(dir.prefix("g1") + ".csv") == slurp(dir.prefix("g2") + ".csv"));
  CHECK(slurp(dir.prefix("g1") + ".json") == slurp(dir.prefix("g2") + ".json"));
  const auto gj = nlohmann::json::parse(slurp(dir.prefix("g1") + ".json"));
  CHECK(gj["config"]["problem"] == "gearbox");
  REQUIRE(gj["runs"].size() == 2);
  for (const auto& run : gj["runs"]) {
    const auto& best = run["best_penalized"];
    CHECK(best["x"].size() == 7);
    CHECK(best["constraints"].size() == 11);
    CHECK(best["satisfied"].size() == 11);
    const std::vector<double> x = best["x"].get<std::vector<double>>();
    CHECK(std::abs(gearbox::objective(x) - best["raw_objective"].get<double>()) <= 1e-9);
    if (!run["best_feasible"].is_null()) CHECK(run["best_feasible"]["feasible"] == true);
  }
}
