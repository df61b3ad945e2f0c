#pragma once

#include <cstddef>
#include <variant>

#include "modeseek/kernel.hpp"
#include "modeseek/types.hpp"

namespace modeseek {

/// Either one bandwidth shared by all points or one per point. All values
/// are strictly positive and finite.
class Bandwidth {
 public:
  static Bandwidth scalar(double sigma);
  static Bandwidth per_point(Vector sigmas);

  bool is_scalar() const { return std::holds_alternative<double>(value_); }

  /// Bandwidth of point n.
  double operator[](Eigen::Index n) const {
    return is_scalar() ? std::get<double>(value_) : std::get<Vector>(value_)[n];
  }

  /// Throws InputError for per-point bandwidths.
  double scalar_value() const;

  /// Number of per-point values; 0 for a scalar bandwidth.
  Eigen::Index size() const { return is_scalar() ? 0 : std::get<Vector>(value_).size(); }

  double min() const;

 private:
  explicit Bandwidth(std::variant<double, Vector> v) : value_(std::move(v)) {}
  std::variant<double, Vector> value_;
};

/// Kernel density estimate p(x) = sum_n pi_n K(||(x - x_n)/sigma_n||^2).
///
/// Densities use the unnormalized profile: no (2 pi sigma^2)^(-D/2) factor.
/// Modes, posteriors and clusterings do not depend on that constant;
/// normalized_density() provides the proper Gaussian density when needed.
///
/// Immutable after construction; all queries are const and thread-safe.
class KdeModel {
 public:
  /// Empty weights mean uniform 1/N. Weights are renormalized to sum to one.
  KdeModel(DataSet data, Kernel kernel, Bandwidth bandwidth, Vector weights = Vector());

  const DataSet& data() const { return data_; }
  const Kernel& kernel() const { return kernel_; }
  const Bandwidth& bandwidth() const { return bandwidth_; }
  const Vector& weights() const { return weights_; }
  Eigen::Index dim() const { return data_.rows(); }
  Eigen::Index size() const { return data_.cols(); }

  double density(const VectorCRef& x) const;
  /// Gaussian only: sum_n pi_n N(x; x_n, sigma_n^2 I).
  double normalized_density(const VectorCRef& x) const;

  Vector gradient(const VectorCRef& x) const;
  /// Gaussian only.
  Matrix hessian(const VectorCRef& x) const;

  /// p(n|x) proportional to pi_n K(t_n), computed with a log-shift so that
  /// far-away queries do not underflow to 0/0. Gaussian only.
  Vector posteriors(const VectorCRef& x) const;

  /// Sum_n p(n|x) (x_n - m)(x_n - m)^T with m = sum_n p(n|x) x_n. Gaussian only.
  Matrix local_covariance(const VectorCRef& x) const;

  /// Squared scaled distances t_n = ||(x - x_n)/sigma_n||^2.
  Vector scaled_distances(const VectorCRef& x) const;

  void check_point(const VectorCRef& x) const;
  void require_gaussian(const char* op) const;

 private:
  DataSet data_;
  Kernel kernel_;
  Bandwidth bandwidth_;
  Vector weights_;
};

/// Per-point Gaussian bandwidths such that the distribution of each point
/// over the other N-1 points has perplexity `perplexity` (within 1e-6).
/// Throws InputError when perplexity is outside (1, N-1] or the data has
/// duplicate points, NoSolutionError when a point cannot reach the target.
Bandwidth entropic_bandwidths(const DataSet& data, double perplexity);

/// Perplexity 2^H of p(m|n) over m != n, p ∝ exp(-||x_n - x_m||^2 / 2 sigma^2).
double neighbor_perplexity(const DataSet& data, Eigen::Index n, double sigma);

}  // namespace modeseek
