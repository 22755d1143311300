#pragma once

// Self-tuning: the firefly engine searches its own (gamma, theta) space,
// scoring each candidate by the mean number of generations an inner run
// needs to reach the problem's tolerance.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "selftune/firefly.hpp"
#include "selftune/problem.hpp"

namespace selftune {

/// How independent replicate runs are dispatched. Results are identical
/// either way.
enum class Execution { serial, parallel };

/// Inner problem and the cost of one meta-evaluation.
struct MetaObjectiveSpec {
  Problem problem;
  double delta = 1e-5;
  std::size_t inner_cap = 5000;  // generations per inner run
  std::size_t repeats = 10;      // inner runs averaged per evaluation
  std::size_t population = 20;   // inner swarm size

  void validate() const;
};

struct Range {
  double lo;
  double hi;
};

struct MetaSearchSpace {
  Range gamma{0.01, 5.0};
  Range theta{0.5, 0.999};

  void validate() const;
};

/// Defaults for the outer (meta) firefly run: gamma = 1, theta = 0.97,
/// 10 meta-fireflies, 30 meta-generations.
FireflyParams default_meta_params();

/// Mean t_delta over `spec.repeats` runs of `params` on the inner problem.
/// Population and iteration cap come from `spec`; gamma, theta, beta0,
/// alpha0 and frame from `params`. Run r uses derive_seed(seed, r). A run
/// that never converges counts as `spec.inner_cap`.
double measure_t_delta(const FireflyParams& params, const MetaObjectiveSpec& spec, std::uint64_t seed,
                       Execution execution = Execution::parallel);

/// Reference implementation of measure_t_delta: plain loop, no threading.
double measure_t_delta_serial(const FireflyParams& params, const MetaObjectiveSpec& spec, std::uint64_t seed);

struct MetaSample {
  double gamma;
  double theta;
  double value;
};

struct TunedParams {
  double gamma = 0.0;
  double theta = 0.0;
  double mean_t_delta = 0.0;
  std::vector<MetaSample> samples;  // every meta-evaluation, in call order
};

/// Stochastic meta-objective: (gamma, theta, evaluation seed) -> cost.
using MetaObjective = std::function<double(double gamma, double theta, std::uint64_t seed)>;

/// Minimizes `objective` over `space` with the firefly engine configured by
/// `meta_params`. The k-th evaluation receives derive_seed(derive_seed(seed, 1), k).
TunedParams tune_parameters(const MetaObjective& objective, const MetaSearchSpace& space,
                            const FireflyParams& meta_params, std::uint64_t seed);

/// tune_parameters with measure_t_delta on `spec` as the objective. Inner
/// runs use beta0, alpha0 and frame from `inner`.
TunedParams self_tune(const MetaObjectiveSpec& spec, const MetaSearchSpace& space, const FireflyParams& meta_params,
                      std::uint64_t seed, const FireflyParams& inner = {});

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Arithmetic mean and Bessel-corrected standard deviation (0 for a single
/// value). Throws UsageError on an empty list.
Summary aggregate_stats(std::span<const double> values);

struct TuningRun {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  double theta = 0.0;
  double mean_t_delta = 0.0;
  double wall_time_s = 0.0;
};

struct TuningReport {
  std::vector<TuningRun> per_run;  // ordered by run_index
  Summary t_delta;
  Summary gamma;
  Summary theta;
  std::size_t run_count = 0;

  /// Recomputes the summaries from `per_run`.
  void summarize();
};

struct CampaignOptions {
  FireflyParams inner{};
  Execution execution = Execution::parallel;
  bool timing = false;  // wall_time_s stays 0 unless set
};

/// `runs` independent self_tune calls; run r uses derive_seed(master_seed, r).
TuningReport tuning_campaign(const MetaObjectiveSpec& spec, const MetaSearchSpace& space,
                             const FireflyParams& meta_params, std::size_t runs, std::uint64_t master_seed,
                             const CampaignOptions& options = {});

}  // namespace selftune
