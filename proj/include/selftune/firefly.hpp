#pragma once

// Firefly algorithm engine (minimization).
//
// Dimmer fireflies move towards every strictly brighter peer with
// attractiveness beta0 * exp(-gamma r^2) plus a Gaussian kick of size
// alpha = alpha0 * theta^t. A firefly with no brighter peer takes a pure
// random walk. Updates are asynchronous: a firefly's intensity is
// re-evaluated right after each of its moves, so later comparisons in the
// same generation see the new value. All coordinates are clamped to the
// problem bounds after every move.
//
// By default the update runs in the unit box: distances are measured on
// coordinates normalized by (hi - lo) and the Gaussian kick is scaled by the
// same widths, so gamma and alpha mean the same thing for every problem.
// SearchFrame::problem applies the update to raw coordinates instead.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "selftune/problem.hpp"
#include "selftune/rng.hpp"

namespace selftune {

enum class SearchFrame { unit_box, problem };

struct FireflyParams {
  double gamma = 1.0;     // light absorption; spatial scale of attraction
  double theta = 0.97;    // randomness decay per generation, in (0, 1)
  double beta0 = 1.0;     // attractiveness at r = 0
  double alpha0 = 1.0;    // initial randomness; 0 switches the kicks off
  std::size_t population = 20;
  std::size_t max_iter = 5000;
  SearchFrame frame = SearchFrame::unit_box;

  /// Throws DomainError for non-finite fields, gamma < 0, theta outside
  /// (0, 1), beta0 <= 0, alpha0 < 0 or an empty population.
  void validate() const;
};

/// Population state. Positions are stored row-major, one row per firefly,
/// and `intensities[i]` caches the objective at row i.
struct Swarm {
  std::size_t dimension = 0;
  std::vector<double> coords;
  std::vector<double> intensities;
  std::size_t generation = 0;

  std::size_t size() const noexcept { return intensities.size(); }
  std::span<double> position(std::size_t i) noexcept { return {coords.data() + i * dimension, dimension}; }
  std::span<const double> position(std::size_t i) const noexcept {
    return {coords.data() + i * dimension, dimension};
  }
  std::size_t brightest() const noexcept;
};

/// Best point ever evaluated. Kept apart from the swarm so that random walks
/// cannot lose it.
struct Incumbent {
  double f = std::numeric_limits<double>::infinity();
  SolutionVector x;

  void offer(double value, std::span<const double> point);
};

struct RunOutcome {
  std::size_t t_delta = 0;  // generations consumed
  double best_f = std::numeric_limits<double>::infinity();
  SolutionVector best_x;
  bool converged = false;
};

/// beta0 * exp(-gamma r^2).
double attractiveness(double beta0, double gamma, double r);

/// alpha0 * theta^t.
double randomness_at(double alpha0, double theta, std::size_t t);

/// Euclidean distance. Throws DimensionError on size mismatch.
double distance(std::span<const double> a, std::span<const double> b);

/// xi + beta(r_ij) (xj - xi) + alpha eps, eps ~ N(0, I), clamped to `bounds`,
/// with alpha = randomness_at(params.alpha0, params.theta, t). In the unit-box
/// frame r_ij is normalized by the bound widths and eps_k is scaled by them.
/// No normal draws are consumed when alpha is zero.
SolutionVector move_firefly(std::span<const double> xi, std::span<const double> xj,
                            const FireflyParams& params, std::size_t t, RngStream& rng,
                            std::span<const Bounds> bounds);

/// xi + alpha eps, clamped to `bounds`.
SolutionVector random_walk(std::span<const double> xi, const FireflyParams& params, std::size_t t,
                           RngStream& rng, std::span<const Bounds> bounds);

/// Uniform random positions inside the bounds, evaluated.
Swarm initialize_swarm(const Problem& problem, std::size_t population, RngStream& rng);

/// One generation of the nested i/j loop; increments `swarm.generation`.
/// Every evaluation is offered to `best` when given.
void fa_step(Swarm& swarm, const Problem& problem, const FireflyParams& params, RngStream& rng,
             Incumbent* best = nullptr);

using GenerationObserver = std::function<void(const Swarm&, const Incumbent&)>;

/// Full run from a seeded uniform initialization. Stops at the first
/// generation t (0 = after initialization) where the incumbent satisfies the
/// problem's criterion for `delta`, or after `params.max_iter` generations.
/// `observer` is called after initialization and after every generation.
RunOutcome fa_run(const Problem& problem, const FireflyParams& params, double delta, std::uint64_t seed,
                  const GenerationObserver& observer = {});

}  // namespace selftune
