#include "modeseek/kde.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "modeseek/error.hpp"

namespace modeseek {

namespace {

bool valid_bandwidth(double s) { return std::isfinite(s) && s > 0.0; }

}  // namespace

Bandwidth Bandwidth::scalar(double sigma) {
  if (!valid_bandwidth(sigma)) throw InputError("bandwidth must be positive and finite");
  return Bandwidth(sigma);
}

Bandwidth Bandwidth::per_point(Vector sigmas) {
  for (Eigen::Index n = 0; n < sigmas.size(); ++n)
    if (!valid_bandwidth(sigmas[n]))
      throw InputError("bandwidth of point " + std::to_string(n) + " must be positive and finite");
  return Bandwidth(std::move(sigmas));
}

double Bandwidth::scalar_value() const {
  if (!is_scalar()) throw InputError("operation requires a scalar bandwidth");
  return std::get<double>(value_);
}

double Bandwidth::min() const {
  return is_scalar() ? std::get<double>(value_) : std::get<Vector>(value_).minCoeff();
}

KdeModel::KdeModel(DataSet data, Kernel kernel, Bandwidth bandwidth, Vector weights)
    : data_(std::move(data)), kernel_(kernel), bandwidth_(std::move(bandwidth)), weights_(std::move(weights)) {
  const Eigen::Index n = data_.cols();
  if (n == 0 || data_.rows() == 0) throw InputError("KDE needs at least one point of dimension >= 1");
  if (!data_.allFinite()) throw InputError("data contains non-finite values");
  if (!bandwidth_.is_scalar() && bandwidth_.size() != n)
    throw InputError("per-point bandwidth count differs from point count");
  if (weights_.size() == 0) {
    weights_ = Vector::Constant(n, 1.0 / static_cast<double>(n));
  } else {
    if (weights_.size() != n) throw InputError("weight count differs from point count");
    if ((weights_.array() < 0.0).any() || !weights_.allFinite())
      throw InputError("weights must be nonnegative and finite");
    const double total = weights_.sum();
    if (!(total > 0.0)) throw InputError("weights sum to zero");
    weights_ /= total;
  }
}

void KdeModel::check_point(const VectorCRef& x) const {
  if (x.size() != dim())
    throw InputError("query has dimension " + std::to_string(x.size()) + ", model has " +
                     std::to_string(dim()));
}

void KdeModel::require_gaussian(const char* op) const {
  if (!kernel_.is_gaussian())
    throw UnsupportedKernelError(std::string(op) + " requires the Gaussian kernel");
}

Vector KdeModel::scaled_distances(const VectorCRef& x) const {
  check_point(x);
  Vector t(size());
  for (Eigen::Index n = 0; n < size(); ++n) {
    const double s = bandwidth_[n];
    t[n] = (x - data_.col(n)).squaredNorm() / (s * s);
  }
  return t;
}

double KdeModel::density(const VectorCRef& x) const {
  const Vector t = scaled_distances(x);
  double p = 0.0;
  for (Eigen::Index n = 0; n < size(); ++n) p += weights_[n] * kernel_.profile(t[n]);
  return p;
}

double KdeModel::normalized_density(const VectorCRef& x) const {
  require_gaussian("normalized density");
  const Vector t = scaled_distances(x);
  const double half_d = 0.5 * static_cast<double>(dim());
  double p = 0.0;
  for (Eigen::Index n = 0; n < size(); ++n) {
    const double s = bandwidth_[n];
    p += weights_[n] * std::pow(2.0 * M_PI * s * s, -half_d) * std::exp(-0.5 * t[n]);
  }
  return p;
}

Vector KdeModel::gradient(const VectorCRef& x) const {
  const Vector t = scaled_distances(x);
  Vector g = Vector::Zero(dim());
  for (Eigen::Index n = 0; n < size(); ++n) {
    const double s2 = bandwidth_[n] * bandwidth_[n];
    const double c = weights_[n] * kernel_.derivative(t[n]) * 2.0 / s2;
    if (c != 0.0) g += c * (x - data_.col(n));
  }
  return g;
}

Matrix KdeModel::hessian(const VectorCRef& x) const {
  require_gaussian("Hessian");
  const Vector t = scaled_distances(x);
  Matrix h = Matrix::Zero(dim(), dim());
  for (Eigen::Index n = 0; n < size(); ++n) {
    const double s2 = bandwidth_[n] * bandwidth_[n];
    const double k = weights_[n] * std::exp(-0.5 * t[n]);
    if (k == 0.0) continue;
    const Vector d = x - data_.col(n);
    h.noalias() += (k / (s2 * s2)) * d * d.transpose();
    h.diagonal().array() -= k / s2;
  }
  // exact symmetry regardless of accumulation order
  return 0.5 * (h + h.transpose());
}

Vector KdeModel::posteriors(const VectorCRef& x) const {
  require_gaussian("posterior weights");
  const Vector t = scaled_distances(x);
  Vector logw(size());
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < size(); ++n) {
    logw[n] = weights_[n] > 0.0 ? std::log(weights_[n]) - 0.5 * t[n]
                                : -std::numeric_limits<double>::infinity();
    best = std::max(best, logw[n]);
  }
  Vector w = (logw.array() - best).exp().matrix();
  return w / w.sum();
}

Matrix KdeModel::local_covariance(const VectorCRef& x) const {
  const Vector post = posteriors(x);
  const Vector mean = data_ * post;
  Matrix cov = Matrix::Zero(dim(), dim());
  for (Eigen::Index n = 0; n < size(); ++n) {
    if (post[n] == 0.0) continue;
    const Vector d = data_.col(n) - mean;
    cov.noalias() += post[n] * d * d.transpose();
  }
  return 0.5 * (cov + cov.transpose());
}

}  // namespace modeseek
