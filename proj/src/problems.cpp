#include "selftune/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "selftune/errors.hpp"

namespace selftune {

double ackley(std::span<const double> x) {
  const double d = static_cast<double>(x.size());
  double squares = 0.0;
  double cosines = 0.0;
  for (double v : x) {
    squares += v * v;
    cosines += std::cos(2.0 * std::numbers::pi * v);
  }
  return -20.0 * std::exp(-0.2 * std::sqrt(squares / d)) - std::exp(cosines / d) + 20.0 + std::numbers::e;
}

double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double forest(std::span<const double> x) {
  double l1 = 0.0;
  double sines = 0.0;
  for (double v : x) {
    l1 += std::abs(v);
    sines += std::sin(v * v);
  }
  return l1 * std::exp(-sines);
}

double rastrigin(std::span<const double> x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
  return s;
}

double zakharov(std::span<const double> x) {
  double squares = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    squares += x[i] * x[i];
    weighted += static_cast<double>(i + 1) * x[i];
  }
  const double half = 0.5 * weighted;
  const double half2 = half * half;
  return squares + half2 + half2 * half2;
}

namespace gearbox {

std::array<Bounds, kDimension> bounds() {
  return {{{2.6, 3.6}, {0.7, 0.8}, {17.0, 28.0}, {7.3, 8.3}, {7.8, 8.3}, {2.9, 3.9}, {5.0, 5.5}}};
}

double objective(std::span<const double> x) {
  const double b = x[0], h = x[1], z = x[2], l1 = x[3], l2 = x[4], d1 = x[5], d2 = x[6];
  return 0.7854 * b * h * h * (3.3333 * z * z + 14.9334 * z - 43.0934) - 1.508 * b * (d1 * d1 + d2 * d2) +
         7.4777 * (d1 * d1 * d1 + d2 * d2 * d2) + 0.7854 * (l1 * d1 * d1 + l2 * d2 * d2);
}

std::array<double, kConstraints> constraints(std::span<const double> x) {
  if (x.size() != kDimension) throw DimensionError("gearbox: expected 7 design variables");
  const double b = x[0], h = x[1], z = x[2], l1 = x[3], l2 = x[4], d1 = x[5], d2 = x[6];
  if (b == 0.0 || h == 0.0 || z == 0.0 || l1 == 0.0 || l2 == 0.0 || d1 == 0.0 || d2 == 0.0) {
    throw DomainError("gearbox: zero design variable in a constraint denominator");
  }
  const double hz = h * z;
  const double shaft1 = 745.0 * l1 / hz;
  const double shaft2 = 745.0 * l2 / hz;
  return {
      27.0 / (b * h * h * z) - 1.0,
      397.5 / (b * h * h * z * z) - 1.0,
      1.93 * l1 * l1 * l1 / (hz * std::pow(d1, 4)) - 1.0,
      1.93 * l2 * l2 * l2 / (hz * std::pow(d2, 4)) - 1.0,
      std::sqrt(shaft1 * shaft1 + 16.9e6) / (110.0 * d1 * d1 * d1) - 1.0,
      std::sqrt(shaft2 * shaft2 + 157.5e6) / (85.0 * d2 * d2 * d2) - 1.0,
      hz / 40.0 - 1.0,
      5.0 * h / b - 1.0,
      b / (12.0 * h) - 1.0,
      (1.5 * d1 + 1.9) / l1 - 1.0,
      (1.1 * d2 + 1.9) / l2 - 1.0,
  };
}

bool feasible(std::span<const double> x, double tolerance) {
  const auto g = constraints(x);
  return std::all_of(g.begin(), g.end(), [tolerance](double gi) { return gi <= tolerance; });
}

double penalized_objective(std::span<const double> x, double lambda) {
  if (x.size() != kDimension) throw DimensionError("gearbox: expected 7 design variables");
  std::array<double, kDimension> r;
  std::copy(x.begin(), x.end(), r.begin());
  const auto box = bounds();
  r[kTeethIndex] = std::clamp(std::round(r[kTeethIndex]), box[kTeethIndex].lo, box[kTeethIndex].hi);
  double violation = 0.0;
  for (double gi : constraints(r)) {
    if (gi > 0.0) violation += gi * gi;
  }
  const double raw = objective(r);
  return violation == 0.0 ? raw : raw + lambda * violation;
}

}  // namespace gearbox

namespace {

Problem benchmark(std::string name, double (*f)(std::span<const double>), double half_width, std::size_t d) {
  Problem p;
  p.name = std::move(name);
  p.bounds.assign(d, Bounds{-half_width, half_width});
  p.objective = f;
  p.known_optimum = 0.0;
  return p;
}

}  // namespace

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"ackley", "sphere", "forest", "rastrigin", "zakharov", "gearbox"};
  return names;
}

bool is_registered(std::string_view name) {
  const auto& names = problem_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Problem make_problem(std::string_view name, const ProblemOptions& options) {
  if (name == "gearbox") {
    if (!(options.penalty >= 0.0) || !std::isfinite(options.penalty)) {
      throw UsageError("gearbox penalty must be finite and non-negative");
    }
    Problem p;
    p.name = "gearbox";
    const auto box = gearbox::bounds();
    p.bounds.assign(box.begin(), box.end());
    p.objective = [lambda = options.penalty](std::span<const double> x) {
      return gearbox::penalized_objective(x, lambda);
    };
    p.target = gearbox::kReferenceWeight;
    p.integer_dims = {gearbox::kTeethIndex};
    return p;
  }
  if (options.dimension == 0) throw UsageError("dimension must be positive");
  const std::size_t d = options.dimension;
  if (name == "ackley") return benchmark("ackley", ackley, 32.768, d);
  if (name == "sphere") return benchmark("sphere", sphere, 5.12, d);
  if (name == "forest") return benchmark("forest", forest, 2.0 * std::numbers::pi, d);
  if (name == "rastrigin") return benchmark("rastrigin", rastrigin, 5.12, d);
  if (name == "zakharov") return benchmark("zakharov", zakharov, 10.0, d);
  throw UsageError("unknown problem '" + std::string(name) + "'");
}

}  // namespace selftune
