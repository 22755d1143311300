#include "selftune/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "parallel.hpp"
#include "selftune/errors.hpp"

namespace selftune {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string single_quoted(std::string_view s) { return "'" + std::string(s) + "'"; }

json parse_scalar(std::string_view text) {
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) return json(std::string(text));  // bare word
  if (value.is_structured()) throw UsageError("expected a scalar, got " + single_quoted(text));
  return value;
}

std::size_t as_count(std::string_view key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
  throw UsageError(std::string(key) + " must be a non-negative integer, got " + v.dump());
}

double as_real(std::string_view key, const json& v) {
  if (!v.is_number()) throw UsageError(std::string(key) + " must be a number, got " + v.dump());
  return v.get<double>();
}

bool as_bool(std::string_view key, const json& v) {
  if (!v.is_boolean()) throw UsageError(std::string(key) + " must be true or false, got " + v.dump());
  return v.get<bool>();
}

std::string as_string(std::string_view key, const json& v) {
  if (!v.is_string()) throw UsageError(std::string(key) + " must be a string, got " + v.dump());
  return v.get<std::string>();
}

std::uint64_t as_seed(std::string_view key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw UsageError(std::string(key) + " must be an integer in [0, 2^64), got " + v.dump());
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, const json&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto count = [&](const char* name, std::size_t ExperimentConfig::*field) {
      t[name] = [field](ExperimentConfig& c, std::string_view k, const json& v) { c.*field = as_count(k, v); };
    };
    auto real = [&](const char* name, double ExperimentConfig::*field) {
      t[name] = [field](ExperimentConfig& c, std::string_view k, const json& v) { c.*field = as_real(k, v); };
    };
    t["problem"] = [](ExperimentConfig& c, std::string_view k, const json& v) { c.problem = as_string(k, v); };
    t["output"] = [](ExperimentConfig& c, std::string_view k, const json& v) { c.output = as_string(k, v); };
    t["master_seed"] = [](ExperimentConfig& c, std::string_view k, const json& v) { c.master_seed = as_seed(k, v); };
    t["timing"] = [](ExperimentConfig& c, std::string_view k, const json& v) { c.timing = as_bool(k, v); };
    t["threads"] = [](ExperimentConfig& c, std::string_view k, const json& v) {
      const std::size_t n = as_count(k, v);
      if (n > 4096) throw UsageError("threads must be at most 4096");
      c.threads = static_cast<int>(n);
    };
    t["frame"] = [](ExperimentConfig& c, std::string_view k, const json& v) {
      const std::string s = as_string(k, v);
      if (s == "unit_box") c.frame = SearchFrame::unit_box;
      else if (s == "problem") c.frame = SearchFrame::problem;
      else throw UsageError("frame must be \"unit_box\" or \"problem\", got " + single_quoted(s));
    };
    t["execution"] = [](ExperimentConfig& c, std::string_view k, const json& v) {
      const std::string s = as_string(k, v);
      if (s == "parallel") c.execution = Execution::parallel;
      else if (s == "serial") c.execution = Execution::serial;
      else throw UsageError("execution must be \"parallel\" or \"serial\", got " + single_quoted(s));
    };
    count("dimension", &ExperimentConfig::dimension);
    count("inner_cap", &ExperimentConfig::inner_cap);
    count("repeats", &ExperimentConfig::repeats);
    count("runs", &ExperimentConfig::runs);
    count("population", &ExperimentConfig::population);
    count("meta_population", &ExperimentConfig::meta_population);
    count("meta_generations", &ExperimentConfig::meta_generations);
    real("delta", &ExperimentConfig::delta);
    real("gamma_min", &ExperimentConfig::gamma_min);
    real("gamma_max", &ExperimentConfig::gamma_max);
    real("theta_min", &ExperimentConfig::theta_min);
    real("theta_max", &ExperimentConfig::theta_max);
    real("meta_gamma", &ExperimentConfig::meta_gamma);
    real("meta_theta", &ExperimentConfig::meta_theta);
    real("penalty", &ExperimentConfig::penalty);
    real("gamma", &ExperimentConfig::gamma);
    real("theta", &ExperimentConfig::theta);
    real("beta0", &ExperimentConfig::beta0);
    real("alpha0", &ExperimentConfig::alpha0);
    return t;
  }();
  return table;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Drops a trailing `#` comment, ignoring `#` inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_string && ch == '\\') {
      ++i;
    } else if (ch == '"') {
      in_string = !in_string;
    } else if (ch == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

template <class F>
auto as_usage_error(F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

const char* frame_name(SearchFrame f) { return f == SearchFrame::unit_box ? "unit_box" : "problem"; }

ordered_json config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["problem"] = c.problem;
  j["dimension"] = c.dimension;
  j["delta"] = c.delta;
  j["inner_cap"] = c.inner_cap;
  j["repeats"] = c.repeats;
  j["runs"] = c.runs;
  j["population"] = c.population;
  j["gamma_min"] = c.gamma_min;
  j["gamma_max"] = c.gamma_max;
  j["theta_min"] = c.theta_min;
  j["theta_max"] = c.theta_max;
  j["meta_gamma"] = c.meta_gamma;
  j["meta_theta"] = c.meta_theta;
  j["meta_population"] = c.meta_population;
  j["meta_generations"] = c.meta_generations;
  j["master_seed"] = c.master_seed;
  j["penalty"] = c.penalty;
  j["frame"] = frame_name(c.frame);
  j["gamma"] = c.gamma;
  j["theta"] = c.theta;
  j["beta0"] = c.beta0;
  j["alpha0"] = c.alpha0;
  return j;
}

ordered_json run_json(const TuningRun& r) {
  ordered_json j;
  j["run_index"] = r.run_index;
  j["seed"] = r.seed;
  j["gamma_star"] = r.gamma;
  j["theta_star"] = r.theta;
  j["mean_t_delta"] = r.mean_t_delta;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

ordered_json summary_json(const TuningReport& report) {
  ordered_json j;
  j["run_count"] = report.run_count;
  j["mean_t_delta"] = report.t_delta.mean;
  j["sigma_t_delta"] = report.t_delta.stddev;
  j["gamma_mean"] = report.gamma.mean;
  j["gamma_sigma"] = report.gamma.stddev;
  j["theta_mean"] = report.theta.mean;
  j["theta_sigma"] = report.theta.stddev;
  return j;
}

ordered_json design_json(const DesignReport& d) {
  ordered_json j;
  j["x"] = d.x;
  j["raw_objective"] = d.raw_objective;
  j["penalized_objective"] = d.penalized_objective;
  j["constraints"] = d.constraints;
  j["satisfied"] = d.satisfied;
  j["feasible"] = d.feasible;
  return j;
}

template <class Body>
void dispatch(Execution execution, std::size_t n, Body&& body) {
  if (execution == Execution::parallel) {
    detail::parallel_for(n, body);
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  if (!is_registered(problem)) throw UsageError("unknown problem " + single_quoted(problem));
  if (dimension == 0) throw UsageError("dimension must be positive");
  if (inner_cap == 0) throw UsageError("inner_cap must be positive");
  if (runs == 0) throw UsageError("runs must be positive");
  if (meta_population == 0) throw UsageError("meta_population must be positive");
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) throw UsageError("penalty must be finite and non-negative");
  if (output.empty()) throw UsageError("output prefix must not be empty");
  as_usage_error([&] {
    objective_spec().validate();
    search_space().validate();
    meta_params().validate();
    inner_params().validate();
    return 0;
  });
}

MetaObjectiveSpec ExperimentConfig::objective_spec() const {
  MetaObjectiveSpec spec;
  spec.problem = make_problem(problem, {.dimension = dimension, .penalty = penalty});
  spec.delta = delta;
  spec.inner_cap = inner_cap;
  spec.repeats = repeats;
  spec.population = population;
  return spec;
}

MetaSearchSpace ExperimentConfig::search_space() const {
  return MetaSearchSpace{{gamma_min, gamma_max}, {theta_min, theta_max}};
}

FireflyParams ExperimentConfig::meta_params() const {
  FireflyParams p = default_meta_params();
  p.gamma = meta_gamma;
  p.theta = meta_theta;
  p.population = meta_population;
  p.max_iter = meta_generations;
  return p;
}

FireflyParams ExperimentConfig::inner_params() const {
  FireflyParams p;
  p.gamma = gamma;
  p.theta = theta;
  p.beta0 = beta0;
  p.alpha0 = alpha0;
  p.population = population;
  p.max_iter = inner_cap;
  p.frame = frame;
  return p;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw UsageError("unknown config key " + single_quoted(key));
  it->second(config, key, parse_scalar(trim(value)));
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text, std::string_view origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw UsageError(where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw UsageError(where + "expected key = value");
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides,
                             const std::optional<std::string>& env_seed) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + single_quoted(path));
  std::ostringstream buffer;
  buffer << in.rdbuf();

  ExperimentConfig config;
  for (const auto& [key, value] : parse_config_text(buffer.str(), path)) {
    try {
      apply_setting(config, key, value);
    } catch (const UsageError& e) {
      throw UsageError(path + ": " + e.what());
    }
  }
  if (env_seed && !env_seed->empty()) {
    try {
      apply_setting(config, "master_seed", *env_seed);
    } catch (const UsageError& e) {
      throw UsageError(std::string(kSeedEnvVar) + ": " + e.what());
    }
  }
  for (const auto& [key, value] : overrides) apply_setting(config, key, value);
  config.validate();
  return config;
}

// ---------------------------------------------------------------------------
// Campaigns

DesignReport describe_gearbox_design(std::span<const double> x, double penalty) {
  if (x.size() != gearbox::kDimension) {
    throw DimensionError("gearbox design needs " + std::to_string(gearbox::kDimension) + " values, got " +
                         std::to_string(x.size()));
  }
  DesignReport d;
  d.x.assign(x.begin(), x.end());
  const Bounds teeth = gearbox::bounds()[gearbox::kTeethIndex];
  d.x[gearbox::kTeethIndex] = std::clamp(std::round(d.x[gearbox::kTeethIndex]), teeth.lo, teeth.hi);
  d.raw_objective = gearbox::objective(d.x);
  d.penalized_objective = gearbox::penalized_objective(x, penalty);
  d.constraints = gearbox::constraints(d.x);
  d.feasible = true;
  for (std::size_t i = 0; i < gearbox::kConstraints; ++i) {
    d.satisfied[i] = d.constraints[i] <= kFeasibilityTolerance;
    d.feasible = d.feasible && d.satisfied[i];
  }
  return d;
}

GearboxRunDesigns gearbox_confirmation_run(const FireflyParams& params, double penalty, std::uint64_t seed) {
  Problem problem = make_problem("gearbox", {.penalty = penalty});
  problem.target.reset();  // run the full budget

  double best_feasible = std::numeric_limits<double>::infinity();
  SolutionVector best_feasible_x;
  const auto penalized = problem.objective;
  problem.objective = [&](std::span<const double> x) {
    const double value = penalized(x);
    const SolutionVector rounded = round_integer_dims(x, problem);
    if (gearbox::feasible(rounded, kFeasibilityTolerance)) {
      const double weight = gearbox::objective(rounded);
      if (weight < best_feasible) {
        best_feasible = weight;
        best_feasible_x = rounded;
      }
    }
    return value;
  };

  const RunOutcome outcome = fa_run(problem, params, 0.0, seed);
  GearboxRunDesigns designs;
  designs.seed = seed;
  designs.best_penalized = describe_gearbox_design(outcome.best_x, penalty);
  if (!best_feasible_x.empty()) designs.best_feasible = describe_gearbox_design(best_feasible_x, penalty);
  return designs;
}

GearboxReport gearbox_campaign(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.problem = "gearbox";
  c.validate();

  GearboxReport report;
  CampaignOptions options{c.inner_params(), c.execution, c.timing};
  report.tuning = tuning_campaign(c.objective_spec(), c.search_space(), c.meta_params(), c.runs, c.master_seed,
                                  options);
  report.designs.resize(report.tuning.per_run.size());
  dispatch(c.execution, report.designs.size(), [&](std::size_t r) {
    const TuningRun& run = report.tuning.per_run[r];
    FireflyParams p = c.inner_params();
    p.gamma = run.gamma;
    p.theta = run.theta;
    report.designs[r] = gearbox_confirmation_run(p, c.penalty, derive_seed(run.seed, 2));
  });
  return report;
}

std::vector<BenchRow> bench_runs(const ExperimentConfig& config) {
  config.validate();
  const Problem problem = make_problem(config.problem, {.dimension = config.dimension, .penalty = config.penalty});
  const FireflyParams params = config.inner_params();
  std::vector<BenchRow> rows(config.runs);
  dispatch(config.execution, rows.size(), [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(config.master_seed, r);
    const RunOutcome out = fa_run(problem, params, config.delta, seed);
    rows[r] = BenchRow{r, seed, out.t_delta, out.converged, out.best_f};
  });
  return rows;
}

void check_report(const TuningReport& report) {
  if (report.per_run.size() != report.run_count) throw InvariantViolation("report row count disagrees with run_count");
  std::vector<double> t, g, th;
  for (std::size_t r = 0; r < report.per_run.size(); ++r) {
    if (report.per_run[r].run_index != r) throw InvariantViolation("report rows are not ordered by run index");
    t.push_back(report.per_run[r].mean_t_delta);
    g.push_back(report.per_run[r].gamma);
    th.push_back(report.per_run[r].theta);
  }
  auto same = [](const Summary& a, const Summary& b) {
    return std::abs(a.mean - b.mean) <= 1e-9 * std::max(1.0, std::abs(b.mean)) &&
           std::abs(a.stddev - b.stddev) <= 1e-9 * std::max(1.0, std::abs(b.stddev));
  };
  if (!same(report.t_delta, aggregate_stats(t)) || !same(report.gamma, aggregate_stats(g)) ||
      !same(report.theta, aggregate_stats(th))) {
    throw InvariantViolation("report summary does not match its rows");
  }
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string tuning_csv(const TuningReport& report) {
  std::string out = "run_index,seed,gamma_star,theta_star,mean_t_delta,wall_time_s\n";
  for (const auto& r : report.per_run) {
    out += std::to_string(r.run_index) + ',' + std::to_string(r.seed) + ',' + format_double(r.gamma) + ',' +
           format_double(r.theta) + ',' + format_double(r.mean_t_delta) + ',' + format_double(r.wall_time_s) + '\n';
  }
  return out;
}

std::string tuning_json(const ExperimentConfig& config, const TuningReport& report) {
  ordered_json j;
  j["command"] = "tune";
  j["config"] = config_json(config);
  j["runs"] = ordered_json::array();
  for (const auto& r : report.per_run) j["runs"].push_back(run_json(r));
  j["summary"] = summary_json(report);
  return j.dump(2) + "\n";
}

std::string gearbox_json(const ExperimentConfig& config, const GearboxReport& report) {
  ordered_json j;
  j["command"] = "gearbox";
  ExperimentConfig c = config;
  c.problem = "gearbox";
  j["config"] = config_json(c);
  j["target"] = gearbox::kReferenceWeight;
  j["runs"] = ordered_json::array();
  std::size_t feasible_hits = 0;
  std::size_t penalized_hits = 0;
  for (std::size_t r = 0; r < report.tuning.per_run.size(); ++r) {
    ordered_json row = run_json(report.tuning.per_run[r]);
    const GearboxRunDesigns& d = report.designs.at(r);
    row["confirmation_seed"] = d.seed;
    row["best_penalized"] = design_json(d.best_penalized);
    row["best_feasible"] = d.best_feasible ? design_json(*d.best_feasible) : ordered_json(nullptr);
    if (d.best_penalized.penalized_objective <= gearbox::kReferenceWeight) ++penalized_hits;
    if (d.best_feasible && d.best_feasible->raw_objective <= gearbox::kReferenceWeight) ++feasible_hits;
    j["runs"].push_back(std::move(row));
  }
  ordered_json summary = summary_json(report.tuning);
  summary["penalized_at_target"] = penalized_hits;
  summary["feasible_at_target"] = feasible_hits;
  j["summary"] = std::move(summary);
  return j.dump(2) + "\n";
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "run_index,seed,t_delta,converged,best_f\n";
  for (const auto& r : rows) {
    out += std::to_string(r.run_index) + ',' + std::to_string(r.seed) + ',' + std::to_string(r.t_delta) + ',' +
           (r.converged ? "1" : "0") + ',' + format_double(r.best_f) + '\n';
  }
  return out;
}

std::string bench_json(const ExperimentConfig& config, const std::vector<BenchRow>& rows) {
  ordered_json j;
  j["command"] = "bench";
  j["config"] = config_json(config);
  j["runs"] = ordered_json::array();
  std::vector<double> t;
  std::size_t converged = 0;
  for (const auto& r : rows) {
    ordered_json row;
    row["run_index"] = r.run_index;
    row["seed"] = r.seed;
    row["t_delta"] = r.t_delta;
    row["converged"] = r.converged;
    row["best_f"] = r.best_f;
    j["runs"].push_back(std::move(row));
    t.push_back(static_cast<double>(r.t_delta));
    if (r.converged) ++converged;
  }
  const Summary s = aggregate_stats(t);
  j["summary"] = {{"run_count", rows.size()}, {"converged", converged}, {"mean_t_delta", s.mean},
                  {"sigma_t_delta", s.stddev}};
  return j.dump(2) + "\n";
}

}  // namespace selftune
