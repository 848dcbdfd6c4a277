#pragma once

#include <cmath>

#include <Eigen/Core>

#include "robustcalib/error.hpp"
#include "robustcalib/loss.hpp"
#include "robustcalib/model.hpp"

namespace robustcalib {

// Posterior eta and a margin interval inside A_F = [-1, 1].
struct CcrQuery {
  double eta;
  double alpha_lo;
  double alpha_hi;

  CcrQuery(double eta_, double lo, double hi) : eta(eta_), alpha_lo(lo), alpha_hi(hi) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
    if (!(lo >= -1.0 && lo <= hi && hi <= 1.0))
      throw DomainError("margin interval must satisfy -1 <= lo <= hi <= 1");
  }
};

template <typename Scalar>
Scalar ccr(const LossSpec& loss, Scalar alpha, Scalar eta) {
  if (!(eta >= 0 && eta <= 1)) throw DomainError("eta must lie in [0, 1]");
  return eta * eval(loss, alpha) + (1 - eta) * eval(loss, -alpha);
}

struct CcrMin {
  double value;
  double argmin;
};

inline constexpr int default_min_ccr_grid = 4001;

// Endpoint rule when the report allows it, otherwise grid plus golden refinement.
CcrMin min_ccr(const StructuralReport& report, const CcrQuery& query,
               int grid_points = default_min_ccr_grid);
CcrMin min_ccr(const LossSpec& loss, const CcrQuery& query);

CcrMin min_ccr_endpoints(const LossSpec& loss, const CcrQuery& query);
CcrMin min_ccr_grid(const LossSpec& loss, const CcrQuery& query,
                    int grid_points = default_min_ccr_grid, double tol = 1e-10);

namespace detail {

template <typename DX>
void require_in_unit_ball(const Eigen::MatrixBase<DX>& x) {
  if (x.squaredNorm() > 1.0 + 1e-12) throw DomainError("point lies outside the unit ball");
}

template <typename Scalar>
void require_risk_inputs(const LinearModel<Scalar>& model, const Dataset<Scalar>& data) {
  if (data.size() == 0) throw DomainError("empty dataset");
  if (model.weights.size() != data.dim()) throw DomainError("model and data dimensions differ");
  if (!(model.weights.norm() > 0)) throw DomainError("weight vector must be nonzero");
}

}  // namespace detail

// 1 iff y (w^T x + b) <= gamma ||w||: some attack of l2 size gamma on x reaches the boundary.
template <typename DW, typename DX>
int robust_loss_linear(const Eigen::MatrixBase<DW>& weights, typename DW::Scalar bias,
                       const Eigen::MatrixBase<DX>& x, int y, typename DW::Scalar gamma) {
  using Scalar = typename DW::Scalar;
  const Scalar wn = weights.norm();
  if (!(wn > 0)) throw DomainError("weight vector must be nonzero");
  if (!(gamma >= 0)) throw DomainError("gamma must be nonnegative");
  if (y != 1 && y != -1) throw DomainError("label must be +1 or -1");
  if (weights.size() != x.size()) throw DomainError("weight and point dimensions differ");
  detail::require_in_unit_ball(x);
  return Scalar(y) * (weights.dot(x) + bias) <= gamma * wn ? 1 : 0;
}

template <typename Scalar>
Scalar robust_risk(const LinearModel<Scalar>& model, const Dataset<Scalar>& data, Scalar gamma) {
  detail::require_risk_inputs(model, data);
  if (!(gamma >= 0)) throw DomainError("gamma must be nonnegative");
  const Scalar threshold = gamma * model.weights.norm();
  return (model.margins(data).array() <= threshold).template cast<Scalar>().mean();
}

template <typename Scalar>
Scalar zero_one_risk(const LinearModel<Scalar>& model, const Dataset<Scalar>& data) {
  detail::require_risk_inputs(model, data);
  return (model.margins(data).array() <= Scalar(0)).template cast<Scalar>().mean();
}

// Share of points whose distance to the decision hyperplane is at most gamma.
template <typename Scalar>
Scalar vulnerable_fraction(const LinearModel<Scalar>& model, const Dataset<Scalar>& data,
                           Scalar gamma) {
  detail::require_risk_inputs(model, data);
  if (!(gamma >= 0)) throw DomainError("gamma must be nonnegative");
  const Scalar threshold = gamma * model.weights.norm();
  return (model.decision_values(data.features).array().abs() <= threshold)
      .template cast<Scalar>()
      .mean();
}

// Mean surrogate loss over the margins.
template <typename Scalar>
Scalar surrogate_risk(const LossSpec& loss, const LinearModel<Scalar>& model,
                      const Dataset<Scalar>& data) {
  detail::require_risk_inputs(model, data);
  return eval(loss, model.margins(data).array()).mean();
}

}  // namespace robustcalib
