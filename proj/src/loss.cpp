#include "robustcalib/loss.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace robustcalib {

namespace {

struct FamilyInfo {
  LossFamily family;
  std::string_view name;
  bool bounded;
  bool convex;
  bool nonincreasing;
};

constexpr FamilyInfo kFamilies[] = {
    {LossFamily::ramp, "ramp", true, false, true},
    {LossFamily::sigmoid, "sigmoid", true, false, true},
    {LossFamily::modified_squared, "modified_squared", true, false, true},
    {LossFamily::hinge, "hinge", false, true, true},
    {LossFamily::logistic, "logistic", false, true, true},
    {LossFamily::squared, "squared", false, true, false},
};

const FamilyInfo& info(LossFamily family) {
  for (const auto& f : kFamilies)
    if (f.family == family) return f;
  throw InternalError("unknown loss family");
}

Eigen::VectorXd symmetric_grid(double radius, int points) {
  Eigen::VectorXd g(points);
  const double half = points - 1;
  for (int i = 0; i < points; ++i) g[i] = radius * (2.0 * i - half) / half;
  return g;
}

void cross_check(bool metadata, bool measured, const LossSpec& loss, const char* what) {
  if (metadata != measured)
    throw InternalError(std::string(to_string(loss.family)) + ": numeric check disagrees with " +
                        what + " metadata");
}

}  // namespace

std::string_view to_string(LossFamily family) { return info(family).name; }

LossFamily parse_family(std::string_view name) {
  for (const auto& f : kFamilies)
    if (f.name == name) return f.family;
  throw DomainError("unknown loss family '" + std::string(name) + "'");
}

bool family_bounded(LossFamily family) { return info(family).bounded; }
bool family_convex(LossFamily family) { return info(family).convex; }
bool family_nonincreasing(LossFamily family) { return info(family).nonincreasing; }

double default_grid_radius(const LossSpec& loss) { return 4.0 + std::abs(loss.shift); }

bool superlevel_sets_contiguous(const Eigen::Ref<const Eigen::VectorXd>& v, double tol) {
  const Eigen::Index n = v.size();
  if (n < 3) return true;
  // A superlevel set has a hole at j exactly when something on both sides of j beats v[j].
  std::vector<double> suffix(n);
  suffix[n - 1] = v[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) suffix[i] = std::max(suffix[i + 1], v[i]);
  double prefix = v[0];
  for (Eigen::Index j = 1; j + 1 < n; ++j) {
    if (v[j] < std::min(prefix, suffix[j + 1]) - tol) return false;
    prefix = std::max(prefix, v[j]);
  }
  return true;
}

StructuralReport structural_report(const LossSpec& loss) {
  return structural_report(loss, default_grid_radius(loss), default_grid_points);
}

StructuralReport structural_report(const LossSpec& loss, double grid_radius, int grid_points) {
  if (!std::isfinite(loss.shift)) throw DomainError("loss shift must be finite");
  if (!(grid_radius >= 2.0 + std::abs(loss.shift)))
    throw PreconditionError("grid radius must be at least 2 + |beta|");
  if (grid_points < 1001 || grid_points % 2 == 0)
    throw PreconditionError("grid needs an odd number of points, at least 1001");

  const FamilyInfo& fam = info(loss.family);
  const Eigen::VectorXd grid = symmetric_grid(grid_radius, grid_points);
  const Eigen::VectorXd values = eval(loss, grid.array()).matrix();

  bool bounded = (values.array() <= 1.0 + 1e-12).all();
  cross_check(fam.bounded, bounded, loss, "boundedness");

  bool monotone = true;
  for (int i = 0; i + 1 < grid_points; ++i)
    if (values[i + 1] > values[i] + 1e-12) monotone = false;
  cross_check(fam.nonincreasing, monotone, loss, "monotonicity");

  bool convex = true;
  for (int i = 1; i + 1 < grid_points; ++i) {
    const double scale = 1.0 + std::abs(values[i]);
    if (values[i - 1] - 2.0 * values[i] + values[i + 1] < -1e-9 * scale) convex = false;
  }
  std::mt19937_64 rng(0x5eedc0de);
  std::uniform_real_distribution<double> point(-grid_radius, grid_radius);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const double a = point(rng), b = point(rng), lam = weight(rng);
    const double chord = lam * eval(loss, a) + (1.0 - lam) * eval(loss, b);
    if (eval(loss, lam * a + (1.0 - lam) * b) > chord + 1e-9 * (1.0 + std::abs(chord)))
      convex = false;
  }
  cross_check(fam.convex, convex, loss, "convexity");

  Eigen::VectorXd even(grid_points);
  for (int i = 0; i < grid_points; ++i) even[i] = even_part(loss, grid[i]);

  StructuralReport r;
  r.loss = loss;
  r.bounded = fam.bounded;
  r.nonincreasing = fam.nonincreasing;
  r.convex = fam.convex;
  r.quasiconcave_even = superlevel_sets_contiguous(even);
  r.B = eval(loss, 1.0) + eval(loss, -1.0);
  r.strict_at_endpoints = eval(loss, -1.0) > eval(loss, 1.0);
  return r;
}

}  // namespace robustcalib
