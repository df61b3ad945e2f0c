#pragma once

#include <Eigen/Core>

namespace modeseek {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// D x N, one point per column.
using DataSet = Eigen::MatrixXd;

using VectorCRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixCRef = Eigen::Ref<const Eigen::MatrixXd>;

inline double squared_distance(const VectorCRef& a, const VectorCRef& b) {
  return (a - b).squaredNorm();
}

/// Largest pairwise Euclidean distance, O(N^2).
double diameter(const MatrixCRef& points);

}  // namespace modeseek
