#include "selftune/problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "selftune/errors.hpp"

namespace selftune {

void Problem::validate() const {
  if (bounds.empty()) throw DomainError("problem '" + name + "' has no dimensions");
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    const auto [lo, hi] = bounds[k];
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw DomainError("problem '" + name + "': bounds of dimension " + std::to_string(k) +
                        " are not an interval lo < hi");
    }
  }
  if (!objective) throw DomainError("problem '" + name + "' has no objective");
  for (auto k : integer_dims) {
    if (k >= bounds.size()) throw DomainError("problem '" + name + "': integer dimension out of range");
  }
}

double Problem::evaluate(std::span<const double> x) const {
  const double f = objective(x);
  if (!std::isfinite(f)) throw EvaluationError("problem '" + name + "' returned a non-finite objective");
  return f;
}

bool Problem::satisfied(double best_f, double delta) const noexcept {
  if (known_optimum) return std::abs(best_f - *known_optimum) <= delta;
  if (target) return best_f <= *target;
  return false;
}

void Problem::clamp(std::span<double> x) const noexcept {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], bounds[k].lo, bounds[k].hi);
}

SolutionVector round_integer_dims(std::span<const double> x, const Problem& problem) {
  SolutionVector out(x.begin(), x.end());
  for (auto k : problem.integer_dims) {
    // std::round rounds halves away from zero.
    out[k] = std::clamp(std::round(out[k]), problem.bounds[k].lo, problem.bounds[k].hi);
  }
  return out;
}

}  // namespace selftune
