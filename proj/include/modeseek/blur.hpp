#pragma once

#include <string>
#include <vector>

#include "modeseek/mode_seek.hpp"

namespace modeseek {

/// A dataset whose points may stand for several original points.
struct WeightedDataSet {
  Matrix points;                      ///< D x M
  Vector weights;                     ///< pi_m, summing to one
  std::vector<long> multiplicity;     ///< original points behind each column
  std::vector<Eigen::Index> origin;   ///< original index -> current column

  /// Uniform weights, multiplicity one, identity origin map.
  static WeightedDataSet uniform(const DataSet& data);

  Eigen::Index size() const { return points.cols(); }
  Eigen::Index original_size() const { return static_cast<Eigen::Index>(origin.size()); }

  /// Throws InputError if the invariants do not hold.
  void validate() const;
};

/// phi(P) = (1 - eta) I + eta P. eta = 1 is standard BMS.
struct FilterSpec {
  double eta = 1.0;

  static FilterSpec standard() { return {}; }
  static FilterSpec explicit_mix(double eta);
};

struct BmsConfig {
  /// Stop when |H(t) - H(t-1)| <= entropy_tol * max(|H(t)|, 1).
  double entropy_tol = 1e-4;
  int max_iter = 500;
  /// Non-positive means "use sigma / 100".
  double merge_eps = 0.0;
};

struct BmsResult {
  Clustering clustering;
  WeightedDataSet final_data;
  int iterations = 0;
  bool converged = false;        ///< false when max_iter was reached
  std::vector<double> entropy;   ///< H after each iteration, H(0) first
  std::vector<Eigen::Index> sizes;  ///< points carried into each iteration
  std::vector<std::string> warnings;
};

/// One blurring step X <- X phi(P), P the column-normalized Gaussian
/// affinities W_nm ∝ pi_n exp(-||x_m - x_n||^2 / 2 sigma^2).
WeightedDataSet bms_step(const WeightedDataSet& data, double sigma, const FilterSpec& filter);

/// Blurs until the dataset entropy settles, then groups the final points
/// with cc_tight.
BmsResult bms_cluster(const DataSet& data, double sigma, const BmsConfig& cfg,
                      const FilterSpec& filter = FilterSpec::standard());

/// As bms_cluster, but after every step points closer than the merge
/// threshold are replaced by their weighted mean, carrying summed weights.
BmsResult bms_cluster_accelerated(const DataSet& data, double sigma, const BmsConfig& cfg);

/// One-step standard-deviation factor for Gaussian data of std s:
/// 1 / (1 + (sigma / s)^2).
double gaussian_shrink_rate(double s, double sigma);

/// -sum_m pi_m log p(x_m) with p the normalized Gaussian KDE of the
/// weighted dataset itself.
double dataset_entropy(const WeightedDataSet& data, double sigma);

}  // namespace modeseek
