#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selftune/problem.hpp"

namespace selftune {

// Benchmarks. Each has its global minimum 0 at the origin.
double ackley(std::span<const double> x);
double sphere(std::span<const double> x);
double forest(std::span<const double> x);
double rastrigin(std::span<const double> x);
double zakharov(std::span<const double> x);

// Speed reducer design, x = (b, h, z, L1, L2, d1, d2).
namespace gearbox {

inline constexpr std::size_t kDimension = 7;
inline constexpr std::size_t kConstraints = 11;
inline constexpr std::size_t kTeethIndex = 2;
inline constexpr double kDefaultPenalty = 1.0e6;
/// Best weight reported in the literature; used as the tuning target.
inline constexpr double kReferenceWeight = 2996.348165;

std::array<Bounds, kDimension> bounds();

/// Total weight. Expects z already rounded.
double objective(std::span<const double> x);

/// g1..g11; g_i <= 0 means satisfied. Throws DomainError on a zero
/// denominator (impossible within the bounds).
std::array<double, kConstraints> constraints(std::span<const double> x);

bool feasible(std::span<const double> x, double tolerance = 0.0);

/// objective(round(x)) + lambda * sum max(0, g_i(round(x)))^2.
double penalized_objective(std::span<const double> x, double lambda = kDefaultPenalty);

}  // namespace gearbox

struct ProblemOptions {
  std::size_t dimension = 8;                  // benchmarks only
  double penalty = gearbox::kDefaultPenalty;  // gearbox only
};

/// Registered names: ackley, sphere, forest, rastrigin, zakharov, gearbox.
const std::vector<std::string>& problem_names();

bool is_registered(std::string_view name);

/// Throws UsageError for an unknown name or a zero dimension.
Problem make_problem(std::string_view name, const ProblemOptions& options = {});

}  // namespace selftune
