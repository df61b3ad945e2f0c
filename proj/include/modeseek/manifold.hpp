#pragma once

#include <vector>

#include "modeseek/types.hpp"

namespace modeseek {

struct MbmsConfig {
  double sigma = 1.0;
  int k = 10;           ///< neighbours (besides the point itself) for local PCA
  int L = 1;            ///< tangent dimension, 0 <= L < D
  int max_iter = 5;
  double stop_ratio = 0.01;

  /// Throws InputError for invalid settings on a D x N dataset.
  void validate(Eigen::Index d, Eigen::Index n) const;
};

struct TangentSpace {
  Vector base;          ///< neighbourhood mean
  Matrix basis;         ///< D x L, orthonormal columns
  Vector eigenvalues;   ///< all D covariance eigenvalues, descending
  bool degenerate = false;  ///< covariance rank below L; basis padded with null directions
};

/// Local PCA on x_n and its k nearest other points.
TangentSpace local_tangent(const DataSet& data, Eigen::Index n, int k, int L);

/// (sum of eigenvalues outside the top L) / (sum of the top L). Infinite when
/// L = 0 or the top L sum is zero while the rest is not.
double normal_to_tangent_ratio(const TangentSpace& t);

/// One synchronous step: each point moves by its full-data Gaussian
/// mean-shift vector with the local tangent component removed.
DataSet mbms_step(const DataSet& data, const MbmsConfig& cfg);

struct MbmsResult {
  DataSet data;
  int iterations = 0;
  std::vector<double> ratios;   ///< mean normal/tangent ratio before each step
  bool stopped_by_ratio = false;
  int degenerate_tangents = 0;  ///< summed over all steps
};

/// Steps until the mean normal/tangent eigenvalue ratio drops below
/// stop_ratio, or max_iter steps.
MbmsResult mbms_run(const DataSet& data, const MbmsConfig& cfg);

}  // namespace modeseek
