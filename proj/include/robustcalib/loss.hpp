#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>

#include <Eigen/Core>

#include "robustcalib/error.hpp"

namespace robustcalib {

enum class LossFamily { ramp, sigmoid, modified_squared, hinge, logistic, squared };

std::string_view to_string(LossFamily family);
LossFamily parse_family(std::string_view name);

// Margin-based surrogate shifted to the right by `shift`: phi_beta(alpha) = phi(alpha - beta).
struct LossSpec {
  LossFamily family = LossFamily::ramp;
  double shift = 0.0;
};

// Family metadata. These are properties of the unshifted shape and so hold for every shift.
bool family_bounded(LossFamily family);
bool family_convex(LossFamily family);
bool family_nonincreasing(LossFamily family);

// phi_gamma(alpha) = 1{alpha <= gamma}: the 0-1 loss under an l2 attack of radius gamma.
class RobustTarget {
 public:
  explicit RobustTarget(double gamma) : gamma_(gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
  }
  double gamma() const noexcept { return gamma_; }
  template <typename Scalar>
  Scalar operator()(Scalar alpha) const {
    return alpha <= Scalar(gamma_) ? Scalar(1) : Scalar(0);
  }

 private:
  double gamma_;
};

template <typename Scalar>
struct OneSided {
  Scalar left;
  Scalar right;
  Scalar mean() const { return (left + right) / 2; }
};

namespace detail {

template <typename Scalar>
Scalar sigmoid_tail(Scalar z) {
  // 1 / (1 + e^z) without overflow for large |z|
  using std::exp;
  if (z >= 0) {
    const Scalar e = exp(-z);
    return e / (1 + e);
  }
  return 1 / (1 + exp(z));
}

template <typename Scalar>
Scalar unshifted(LossFamily family, Scalar z) {
  using std::log1p;
  using std::exp;
  switch (family) {
    case LossFamily::ramp: {
      const Scalar v = (1 - z) / 2;
      return v < 0 ? Scalar(0) : (v > 1 ? Scalar(1) : v);
    }
    case LossFamily::sigmoid:
      return sigmoid_tail(z);
    case LossFamily::modified_squared:
      if (z <= 0) return Scalar(1);
      if (z <= 1) return (1 - z) * (1 - z);
      return Scalar(0);
    case LossFamily::hinge:
      return z < 1 ? 1 - z : Scalar(0);
    case LossFamily::logistic:
      return z >= 0 ? log1p(exp(-z)) : -z + log1p(exp(z));
    case LossFamily::squared:
      return (1 - z) * (1 - z);
  }
  return Scalar(0);
}

template <typename Scalar>
OneSided<Scalar> unshifted_derivatives(LossFamily family, Scalar z) {
  switch (family) {
    case LossFamily::ramp: {
      const Scalar h = Scalar(-0.5);
      return {(z > -1 && z <= 1) ? h : Scalar(0), (z >= -1 && z < 1) ? h : Scalar(0)};
    }
    case LossFamily::sigmoid: {
      const Scalar s = sigmoid_tail(z);
      const Scalar d = -s * (1 - s);
      return {d, d};
    }
    case LossFamily::modified_squared: {
      const Scalar d = -2 * (1 - z);
      return {(z > 0 && z <= 1) ? d : Scalar(0), (z >= 0 && z < 1) ? d : Scalar(0)};
    }
    case LossFamily::hinge:
      return {z <= 1 ? Scalar(-1) : Scalar(0), z < 1 ? Scalar(-1) : Scalar(0)};
    case LossFamily::logistic: {
      const Scalar d = -sigmoid_tail(z);
      return {d, d};
    }
    case LossFamily::squared: {
      const Scalar d = -2 * (1 - z);
      return {d, d};
    }
  }
  return {Scalar(0), Scalar(0)};
}

template <typename Scalar>
void require_finite(Scalar alpha) {
  using std::isfinite;
  if (!isfinite(alpha)) throw DomainError("loss argument must be finite");
}

}  // namespace detail

template <typename Scalar>
concept Real = std::is_floating_point_v<Scalar>;

template <Real Scalar>
Scalar eval(const LossSpec& loss, Scalar alpha) {
  detail::require_finite(alpha);
  return detail::unshifted(loss.family, alpha - Scalar(loss.shift));
}

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
eval(const LossSpec& loss, const Eigen::ArrayBase<Derived>& alpha) {
  using Scalar = typename Derived::Scalar;
  return alpha.derived().unaryExpr([&loss](Scalar a) { return eval(loss, a); });
}

// phi(alpha) + phi(-alpha); the 1/2 factor of the textbook even part is dropped throughout.
template <Real Scalar>
Scalar even_part(const LossSpec& loss, Scalar alpha) {
  return eval(loss, alpha) + eval(loss, -alpha);
}

template <Real Scalar>
OneSided<Scalar> one_sided_derivatives(const LossSpec& loss, Scalar alpha) {
  detail::require_finite(alpha);
  return detail::unshifted_derivatives(loss.family, alpha - Scalar(loss.shift));
}

struct StructuralReport {
  LossSpec loss;
  bool bounded = false;
  bool nonincreasing = false;
  bool quasiconcave_even = false;
  bool convex = false;
  double B = 0.0;
  bool strict_at_endpoints = false;

  bool satisfies_quasiconcave_condition() const {
    return bounded && nonincreasing && quasiconcave_even && strict_at_endpoints;
  }
};

double default_grid_radius(const LossSpec& loss);
inline constexpr int default_grid_points = 4001;

StructuralReport structural_report(const LossSpec& loss);
StructuralReport structural_report(const LossSpec& loss, double grid_radius, int grid_points);

// True when every superlevel set of the sampled values is a contiguous index range.
bool superlevel_sets_contiguous(const Eigen::Ref<const Eigen::VectorXd>& values, double tol = 1e-9);

}  // namespace robustcalib
