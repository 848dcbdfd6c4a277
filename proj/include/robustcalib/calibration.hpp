#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "robustcalib/loss.hpp"

namespace robustcalib {

enum class CurveKind { raw_delta, check_delta, biconjugate };

// Sampled (epsilon, delta) pairs; +infinity is a legal delta.
struct CalibrationCurve {
  Eigen::VectorXd epsilons;
  Eigen::VectorXd deltas;
  CurveKind kind = CurveKind::raw_delta;
};

// Throws DomainError unless the epsilons are strictly increasing in (0, 1] and deltas are nonnegative.
void validate_curve(const CalibrationCurve& curve);

// Piecewise-linear reading anchored at (0, 0); +infinity past the last finite grid point.
double interpolate(const CalibrationCurve& curve, double epsilon);

struct NumericOptions {
  int eta_points = 2001;
  int alpha_points = 2001;
  double eta_tolerance = 1e-8;
  // Scan eta over [0, 1] instead of [1/2, 1]; only useful for checking the symmetry shortcut.
  bool full_eta_range = false;
  unsigned threads = 0;  // 0 picks the hardware concurrency
};

Eigen::VectorXd epsilon_grid(double lo, double hi, int points);
Eigen::VectorXd default_epsilon_grid();

// Pointwise calibration function: +infinity, the band infimum, or the union infimum, by case.
double delta_bar(const LossSpec& loss, double gamma, double epsilon, double eta,
                 int alpha_grid = 2001);
double delta_bar(const StructuralReport& report, double gamma, double epsilon, double eta,
                 int alpha_grid = 2001);

CalibrationCurve calibration_fn_numeric(const LossSpec& loss, double gamma,
                                        const Eigen::VectorXd& epsilons,
                                        const NumericOptions& options = {});

// Lower convex envelope of the finite samples together with (0, 0).
CalibrationCurve biconjugate(const CalibrationCurve& curve);

struct ExcessBound {
  double epsilon;
  bool invertible;
};

// Largest epsilon on the curve's domain with biconj(epsilon) <= surrogate_excess.
ExcessBound excess_risk_transform(const CalibrationCurve& biconj, double surrogate_excess);

enum class Target { phi_gamma, phi_01 };
enum class Rule { convex_surrogate, quasiconcave_condition, numeric_delta };

std::string_view to_string(Rule rule);
std::string_view to_string(Target target);

struct Verdict {
  bool calibrated = false;
  Target target = Target::phi_gamma;
  Rule rule = Rule::numeric_delta;
  // phi(gamma) + phi(-gamma) - B for the quasiconcave rule; min delta (or the first epsilon with
  // delta ~ 0) for the numeric rule; 0 for convex losses.
  double witness = 0.0;
  std::optional<bool> phi01_calibrated;
};

inline constexpr double positivity_threshold = 1e-6;

Verdict verdict(const LossSpec& loss, double gamma, const StructuralReport& report,
                const NumericOptions& options = {});

}  // namespace robustcalib
