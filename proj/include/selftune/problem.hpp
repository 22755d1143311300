#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace selftune {

/// Point in a box-bounded search space.
using SolutionVector = std::vector<double>;

struct Bounds {
  double lo;
  double hi;
};

/// A minimization problem: objective, box bounds and a stopping criterion.
///
/// Problems used for tuning carry exactly one of `known_optimum` (stop when
/// |best - f*| <= delta) or `target` (stop when best <= target). A problem
/// with neither runs until the iteration cap.
struct Problem {
  using Objective = std::function<double(std::span<const double>)>;

  std::string name;
  std::vector<Bounds> bounds;
  Objective objective;
  std::optional<double> known_optimum;
  std::optional<double> target;
  std::vector<std::size_t> integer_dims;

  std::size_t dimension() const noexcept { return bounds.size(); }

  /// Throws DomainError on empty or inverted bounds, a missing objective, or
  /// out-of-range integer dimensions.
  void validate() const;

  /// Objective value at `x`. Throws EvaluationError if it is not finite.
  double evaluate(std::span<const double> x) const;

  /// Whether `best_f` meets the stopping criterion for tolerance `delta`.
  bool satisfied(double best_f, double delta) const noexcept;

  void clamp(std::span<double> x) const noexcept;
};

/// Rounds the integer dimensions of `x` to the nearest integer (halves away
/// from zero) and clamps them to their bounds. Other coordinates are copied.
SolutionVector round_integer_dims(std::span<const double> x, const Problem& problem);

}  // namespace selftune
