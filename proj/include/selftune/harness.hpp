#pragma once

// Experiment front end: configuration, campaigns and report files.
//
// Config files are flat `key = value` lines with JSON scalar values
// (numbers, true/false, quoted strings; bare words are read as strings).
// `#` starts a comment. Precedence: file < SELFTUNE_SEED < command line.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selftune/firefly.hpp"
#include "selftune/problems.hpp"
#include "selftune/tuner.hpp"

namespace selftune {

inline constexpr const char* kSeedEnvVar = "SELFTUNE_SEED";

/// A gearbox design counts as feasible when every g_i <= this.
inline constexpr double kFeasibilityTolerance = 1e-9;

struct ExperimentConfig {
  std::string problem = "sphere";
  std::size_t dimension = 8;
  double delta = 1e-5;
  std::size_t inner_cap = 5000;
  std::size_t repeats = 10;  // inner runs per meta-evaluation
  std::size_t runs = 50;     // independent tuning runs
  std::size_t population = 20;
  double gamma_min = 0.01;
  double gamma_max = 5.0;
  double theta_min = 0.5;
  double theta_max = 0.999;
  double meta_gamma = 1.0;
  double meta_theta = 0.97;
  std::size_t meta_population = 10;
  std::size_t meta_generations = 30;
  std::uint64_t master_seed = 1;
  std::string output = "selftune";  // report prefix
  double penalty = gearbox::kDefaultPenalty;
  SearchFrame frame = SearchFrame::unit_box;
  Execution execution = Execution::parallel;
  bool timing = false;  // record wall time (makes reports non-reproducible)
  int threads = 0;      // 0 keeps the OpenMP default
  // Engine parameters for inner runs (gamma and theta are used by `bench`).
  double gamma = 1.0;
  double theta = 0.97;
  double beta0 = 1.0;
  double alpha0 = 1.0;

  /// Throws UsageError on any invalid field.
  void validate() const;

  MetaObjectiveSpec objective_spec() const;
  MetaSearchSpace search_space() const;
  FireflyParams meta_params() const;
  FireflyParams inner_params() const;
};

/// Names accepted by apply_setting.
const std::vector<std::string>& config_keys();

/// Sets one field from a JSON scalar literal. Throws UsageError on an
/// unknown key or a value of the wrong type or range.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Parses config text into ordered (key, value) pairs. Throws UsageError on
/// malformed lines, naming `origin` and the line number.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text,
                                                                   std::string_view origin = "<config>");

/// File, then `env_seed` (if set), then `overrides`. Validates the result.
/// Throws UsageError if the file cannot be read.
ExperimentConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides,
                             const std::optional<std::string>& env_seed);

/// Everything the reports say about one gearbox design.
struct DesignReport {
  std::vector<double> x;  // z rounded and clamped
  double raw_objective = 0.0;
  double penalized_objective = 0.0;
  std::array<double, gearbox::kConstraints> constraints{};
  std::array<bool, gearbox::kConstraints> satisfied{};  // g_i <= kFeasibilityTolerance
  bool feasible = false;
};

DesignReport describe_gearbox_design(std::span<const double> x, double penalty = gearbox::kDefaultPenalty);

/// Best designs seen during a confirmation run of tuned parameters.
struct GearboxRunDesigns {
  std::uint64_t seed = 0;
  DesignReport best_penalized;
  std::optional<DesignReport> best_feasible;  // feasible, lowest weight
};

/// One full-length engine run (no early stop) on the penalized gearbox,
/// tracking the best penalized and the best strictly feasible design.
GearboxRunDesigns gearbox_confirmation_run(const FireflyParams& params, double penalty, std::uint64_t seed);

struct GearboxReport {
  TuningReport tuning;
  std::vector<GearboxRunDesigns> designs;  // one per tuning run
};

GearboxReport gearbox_campaign(const ExperimentConfig& config);

struct BenchRow {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::size_t t_delta = 0;
  bool converged = false;
  double best_f = 0.0;
};

/// `config.runs` plain engine runs with the configured parameters.
std::vector<BenchRow> bench_runs(const ExperimentConfig& config);

/// Throws InvariantViolation unless the summaries match a recomputation
/// from the rows to 1e-9.
void check_report(const TuningReport& report);

std::string format_double(double value);

std::string tuning_csv(const TuningReport& report);
std::string tuning_json(const ExperimentConfig& config, const TuningReport& report);
std::string gearbox_json(const ExperimentConfig& config, const GearboxReport& report);
std::string bench_csv(const std::vector<BenchRow>& rows);
std::string bench_json(const ExperimentConfig& config, const std::vector<BenchRow>& rows);

/// Command-line entry point. Returns the process exit status:
/// 0 ok, 2 usage or config error, 3 I/O error, 4 internal invariant violation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace selftune
