#pragma once

#include <cmath>

#include <Eigen/Core>

namespace robustcalib {

// Rows of `features` are points of the unit ball; labels are +1 or -1.
template <typename Scalar>
struct Dataset {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> features;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> labels;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

// f(x) = weights^T x + bias.
template <typename Scalar>
struct LinearModel {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
  Scalar bias = Scalar(0);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> decision_values(
      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& features) const {
    return (features * weights).array() + bias;
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> margins(const Dataset<Scalar>& data) const {
    return data.labels.cwiseProduct(decision_values(data.features));
  }
  Scalar augmented_norm() const { return std::sqrt(weights.squaredNorm() + bias * bias); }
};

using Datasetd = Dataset<double>;
using LinearModeld = LinearModel<double>;

}  // namespace robustcalib
