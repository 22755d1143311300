#include "selftune/firefly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "selftune/errors.hpp"

namespace selftune {
namespace {

bool finite(double v) { return std::isfinite(v); }

// Per-dimension widths of the search frame. Unit widths make the update act
// on raw coordinates.
struct Frame {
  std::vector<double> width;
  std::vector<double> inv_width2;

  Frame(SearchFrame kind, std::span<const Bounds> bounds) : width(bounds.size(), 1.0), inv_width2(bounds.size(), 1.0) {
    if (kind == SearchFrame::problem) return;
    for (std::size_t k = 0; k < bounds.size(); ++k) {
      width[k] = bounds[k].hi - bounds[k].lo;
      inv_width2[k] = 1.0 / (width[k] * width[k]);
    }
  }
};

// In-place move of xi towards xj. alpha == 0 consumes no draws.
void move_towards(std::span<double> xi, std::span<const double> xj, double beta0, double gamma,
                  double alpha, RngStream& rng, std::span<const Bounds> bounds, const Frame& frame) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const double diff = xj[k] - xi[k];
    r2 += diff * diff * frame.inv_width2[k];
  }
  const double beta = beta0 * std::exp(-gamma * r2);
  for (std::size_t k = 0; k < xi.size(); ++k) {
    double v = xi[k] + beta * (xj[k] - xi[k]);
    if (alpha != 0.0) v += alpha * frame.width[k] * rng.normal();
    xi[k] = std::clamp(v, bounds[k].lo, bounds[k].hi);
  }
}

void walk(std::span<double> xi, double alpha, RngStream& rng, std::span<const Bounds> bounds,
          const Frame& frame) {
  if (alpha == 0.0) return;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    xi[k] = std::clamp(xi[k] + alpha * frame.width[k] * rng.normal(), bounds[k].lo, bounds[k].hi);
  }
}

void check_bounds_dimension(std::size_t n, std::span<const Bounds> bounds) {
  if (n != bounds.size()) throw DimensionError("point and bounds differ in dimension");
}

}  // namespace

void FireflyParams::validate() const {
  if (!finite(gamma) || gamma < 0.0) throw DomainError("gamma must be finite and non-negative");
  if (!finite(theta) || !(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
  if (!finite(beta0) || beta0 <= 0.0) throw DomainError("beta0 must be positive");
  if (!finite(alpha0) || alpha0 < 0.0) throw DomainError("alpha0 must be non-negative");
  if (population == 0) throw DomainError("population must be at least 1");
}

std::size_t Swarm::brightest() const noexcept {
  return static_cast<std::size_t>(std::min_element(intensities.begin(), intensities.end()) -
                                  intensities.begin());
}

void Incumbent::offer(double value, std::span<const double> point) {
  if (value < f || x.empty()) {
    f = value;
    x.assign(point.begin(), point.end());
  }
}

double attractiveness(double beta0, double gamma, double r) {
  if (!finite(beta0) || !finite(gamma) || !finite(r)) throw DomainError("attractiveness: non-finite input");
  if (beta0 <= 0.0 || gamma < 0.0 || r < 0.0) throw DomainError("attractiveness: input out of domain");
  return beta0 * std::exp(-gamma * r * r);
}

double randomness_at(double alpha0, double theta, std::size_t t) {
  if (!finite(theta) || !(theta > 0.0 && theta < 1.0)) throw DomainError("randomness_at: theta must lie in (0, 1)");
  if (!finite(alpha0) || alpha0 < 0.0) throw DomainError("randomness_at: alpha0 must be non-negative");
  return alpha0 * std::pow(theta, static_cast<double>(t));
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("distance: dimension mismatch");
  double r2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) r2 += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(r2);
}

SolutionVector move_firefly(std::span<const double> xi, std::span<const double> xj,
                            const FireflyParams& params, std::size_t t, RngStream& rng,
                            std::span<const Bounds> bounds) {
  if (xi.size() != xj.size()) throw DimensionError("move_firefly: dimension mismatch");
  check_bounds_dimension(xi.size(), bounds);
  SolutionVector out(xi.begin(), xi.end());
  move_towards(out, xj, params.beta0, params.gamma, randomness_at(params.alpha0, params.theta, t), rng, bounds,
               Frame(params.frame, bounds));
  return out;
}

SolutionVector random_walk(std::span<const double> xi, const FireflyParams& params, std::size_t t,
                           RngStream& rng, std::span<const Bounds> bounds) {
  check_bounds_dimension(xi.size(), bounds);
  SolutionVector out(xi.begin(), xi.end());
  walk(out, randomness_at(params.alpha0, params.theta, t), rng, bounds, Frame(params.frame, bounds));
  return out;
}

Swarm initialize_swarm(const Problem& problem, std::size_t population, RngStream& rng) {
  Swarm swarm;
  swarm.dimension = problem.dimension();
  swarm.coords.resize(population * swarm.dimension);
  swarm.intensities.resize(population);
  for (std::size_t i = 0; i < population; ++i) {
    auto x = swarm.position(i);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = rng.uniform(problem.bounds[k].lo, problem.bounds[k].hi);
  }
  for (std::size_t i = 0; i < population; ++i) swarm.intensities[i] = problem.evaluate(swarm.position(i));
  return swarm;
}

void fa_step(Swarm& swarm, const Problem& problem, const FireflyParams& params, RngStream& rng,
             Incumbent* best) {
  const std::size_t n = swarm.size();
  const double alpha = randomness_at(params.alpha0, params.theta, swarm.generation);
  const Frame frame(params.frame, problem.bounds);
  auto& light = swarm.intensities;
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = swarm.position(i);
    bool moved = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(light[j] < light[i])) continue;
      move_towards(xi, swarm.position(j), params.beta0, params.gamma, alpha, rng, problem.bounds, frame);
      light[i] = problem.evaluate(xi);
      if (best) best->offer(light[i], xi);
      moved = true;
    }
    if (!moved && alpha != 0.0) {
      walk(xi, alpha, rng, problem.bounds, frame);
      light[i] = problem.evaluate(xi);
      if (best) best->offer(light[i], xi);
    }
  }
  ++swarm.generation;
}

RunOutcome fa_run(const Problem& problem, const FireflyParams& params, double delta, std::uint64_t seed,
                  const GenerationObserver& observer) {
  params.validate();
  problem.validate();
  RngStream rng(seed);
  Swarm swarm = initialize_swarm(problem, params.population, rng);
  Incumbent best;
  for (std::size_t i = 0; i < swarm.size(); ++i) best.offer(swarm.intensities[i], swarm.position(i));
  if (observer) observer(swarm, best);

  RunOutcome out;
  std::vector<double> before;
  std::size_t t = 0;
  bool done = problem.satisfied(best.f, delta);
  while (!done && t < params.max_iter) {
    // Once alpha has underflowed the update is deterministic, so a generation
    // that changes nothing is a fixed point and the rest of the run is idle.
    const bool frozen = randomness_at(params.alpha0, params.theta, swarm.generation) == 0.0;
    if (frozen) before = swarm.coords;
    fa_step(swarm, problem, params, rng, &best);
    ++t;
    if (observer) observer(swarm, best);
    done = problem.satisfied(best.f, delta);
    if (!done && frozen && !observer && before == swarm.coords) t = params.max_iter;
  }
  out.converged = done;
  out.t_delta = t;
  out.best_f = best.f;
  out.best_x = std::move(best.x);
  return out;
}

}  // namespace selftune
