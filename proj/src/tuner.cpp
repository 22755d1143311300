#include "selftune/tuner.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "parallel.hpp"
#include "selftune/errors.hpp"
#include "selftune/rng.hpp"

namespace selftune {
namespace {

constexpr std::uint64_t kMetaRunStream = 0;
constexpr std::uint64_t kEvaluationStream = 1;

FireflyParams inner_params(const FireflyParams& params, const MetaObjectiveSpec& spec) {
  FireflyParams p = params;
  p.population = spec.population;
  p.max_iter = spec.inner_cap;
  p.validate();
  return p;
}

double single_run(const FireflyParams& params, const MetaObjectiveSpec& spec, std::uint64_t seed) {
  const RunOutcome out = fa_run(spec.problem, params, spec.delta, seed);
  return out.converged ? static_cast<double>(out.t_delta) : static_cast<double>(spec.inner_cap);
}

}  // namespace

void MetaObjectiveSpec::validate() const {
  problem.validate();
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
  if (inner_cap == 0) throw DomainError("inner cap must be at least 1");
  if (repeats == 0) throw DomainError("repeats must be at least 1");
  if (population == 0) throw DomainError("inner population must be at least 1");
}

void MetaSearchSpace::validate() const {
  if (!(gamma.lo > 0.0 && gamma.lo < gamma.hi) || !std::isfinite(gamma.hi)) {
    throw DomainError("gamma range must satisfy 0 < lo < hi");
  }
  if (!(theta.lo > 0.0 && theta.lo < theta.hi && theta.hi < 1.0)) {
    throw DomainError("theta range must satisfy 0 < lo < hi < 1");
  }
}

FireflyParams default_meta_params() {
  FireflyParams p;
  p.gamma = 1.0;
  p.theta = 0.97;
  p.population = 10;
  p.max_iter = 30;
  return p;
}

double measure_t_delta_serial(const FireflyParams& params, const MetaObjectiveSpec& spec, std::uint64_t seed) {
  spec.validate();
  const FireflyParams p = inner_params(params, spec);
  double sum = 0.0;
  for (std::size_t r = 0; r < spec.repeats; ++r) sum += single_run(p, spec, derive_seed(seed, r));
  return sum / static_cast<double>(spec.repeats);
}

double measure_t_delta(const FireflyParams& params, const MetaObjectiveSpec& spec, std::uint64_t seed,
                       Execution execution) {
  if (execution == Execution::serial) return measure_t_delta_serial(params, spec, seed);
  spec.validate();
  const FireflyParams p = inner_params(params, spec);
  std::vector<double> t(spec.repeats);
  // Summed afterwards in index order so the result does not depend on the
  // schedule.
  detail::parallel_for(spec.repeats, [&](std::size_t r) { t[r] = single_run(p, spec, derive_seed(seed, r)); });
  double sum = 0.0;
  for (double v : t) sum += v;
  return sum / static_cast<double>(spec.repeats);
}

TunedParams tune_parameters(const MetaObjective& objective, const MetaSearchSpace& space,
                            const FireflyParams& meta_params, std::uint64_t seed) {
  space.validate();
  meta_params.validate();
  TunedParams result;
  const std::uint64_t evaluation_master = derive_seed(seed, kEvaluationStream);

  Problem meta;
  meta.name = "meta";
  meta.bounds = {{space.gamma.lo, space.gamma.hi}, {space.theta.lo, space.theta.hi}};
  meta.objective = [&](std::span<const double> x) {
    const double value = objective(x[0], x[1], derive_seed(evaluation_master, result.samples.size()));
    result.samples.push_back({x[0], x[1], value});
    return value;
  };
  // No stopping criterion: the meta run always uses its full budget.
  const RunOutcome best = fa_run(meta, meta_params, 0.0, derive_seed(seed, kMetaRunStream));
  result.gamma = best.best_x[0];
  result.theta = best.best_x[1];
  result.mean_t_delta = best.best_f;
  return result;
}

TunedParams self_tune(const MetaObjectiveSpec& spec, const MetaSearchSpace& space, const FireflyParams& meta_params,
                      std::uint64_t seed, const FireflyParams& inner) {
  spec.validate();
  return tune_parameters(
      [&](double gamma, double theta, std::uint64_t eval_seed) {
        FireflyParams p = inner;
        p.gamma = gamma;
        p.theta = theta;
        return measure_t_delta(p, spec, eval_seed);
      },
      space, meta_params, seed);
}

Summary aggregate_stats(std::span<const double> values) {
  if (values.empty()) throw UsageError("aggregate_stats: empty list");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

void TuningReport::summarize() {
  run_count = per_run.size();
  std::vector<double> t, g, th;
  for (const auto& r : per_run) {
    t.push_back(r.mean_t_delta);
    g.push_back(r.gamma);
    th.push_back(r.theta);
  }
  t_delta = aggregate_stats(t);
  gamma = aggregate_stats(g);
  theta = aggregate_stats(th);
}

TuningReport tuning_campaign(const MetaObjectiveSpec& spec, const MetaSearchSpace& space,
                             const FireflyParams& meta_params, std::size_t runs, std::uint64_t master_seed,
                             const CampaignOptions& options) {
  if (runs == 0) throw UsageError("tuning_campaign: runs must be at least 1");
  spec.validate();
  space.validate();
  meta_params.validate();

  TuningReport report;
  report.per_run.resize(runs);
  auto one = [&](std::size_t r) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = derive_seed(master_seed, r);
    const TunedParams tuned = self_tune(spec, space, meta_params, seed, options.inner);
    TuningRun& row = report.per_run[r];
    row.run_index = r;
    row.seed = seed;
    row.gamma = tuned.gamma;
    row.theta = tuned.theta;
    row.mean_t_delta = tuned.mean_t_delta;
    if (options.timing) {
      row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  if (options.execution == Execution::serial) {
    for (std::size_t r = 0; r < runs; ++r) one(r);
  } else {
    detail::parallel_for(runs, one);
  }
  report.summarize();
  return report;
}

}  // namespace selftune
