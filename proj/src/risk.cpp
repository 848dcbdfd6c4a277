#include "robustcalib/risk.hpp"

#include "robustcalib/numeric.hpp"

namespace robustcalib {

CcrMin min_ccr_endpoints(const LossSpec& loss, const CcrQuery& q) {
  const double lo = ccr(loss, q.alpha_lo, q.eta);
  const double hi = ccr(loss, q.alpha_hi, q.eta);
  return lo <= hi ? CcrMin{lo, q.alpha_lo} : CcrMin{hi, q.alpha_hi};
}

CcrMin min_ccr_grid(const LossSpec& loss, const CcrQuery& q, int grid_points, double tol) {
  if (grid_points < 2) throw PreconditionError("min_ccr grid needs at least 2 points");
  const auto f = [&](double a) { return q.eta * eval(loss, a) + (1.0 - q.eta) * eval(loss, -a); };
  const auto m = numeric::grid_then_golden(f, q.alpha_lo, q.alpha_hi, grid_points, tol);
  return {m.fx, m.x};
}

CcrMin min_ccr(const StructuralReport& report, const CcrQuery& q, int grid_points) {
  if (report.quasiconcave_even && report.nonincreasing) return min_ccr_endpoints(report.loss, q);
  return min_ccr_grid(report.loss, q, grid_points);
}

CcrMin min_ccr(const LossSpec& loss, const CcrQuery& q) {
  return min_ccr(structural_report(loss), q);
}

}  // namespace robustcalib
