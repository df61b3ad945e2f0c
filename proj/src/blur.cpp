#include "modeseek/blur.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "modeseek/error.hpp"
#include "modeseek/parallel.hpp"

namespace modeseek {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("bandwidth must be positive and finite");
}

double resolve_eps(double eps, double sigma) { return eps > 0.0 ? eps : sigma / 100.0; }

/// Column m of P: posterior of each source n given x_m, with a log-shift.
void posterior_column(const WeightedDataSet& d, Eigen::Index m, double inv2s2, Vector& out) {
  const Eigen::Index n = d.size();
  out.resize(n);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = d.weights[j];
    out[j] = w > 0.0 ? std::log(w) - squared_distance(d.points.col(m), d.points.col(j)) * inv2s2
                     : -std::numeric_limits<double>::infinity();
    best = std::max(best, out[j]);
  }
  out = (out.array() - best).exp();
  out /= out.sum();
}

Clustering pull_back(const WeightedDataSet& d, double eps) {
  const CcResult cc = cc_tight(d.points, eps);
  Clustering c;
  c.centers = Matrix::Zero(d.points.rows(), cc.count());
  Vector mass = Vector::Zero(cc.count());
  for (Eigen::Index m = 0; m < d.size(); ++m) {
    const int k = cc.labels[static_cast<std::size_t>(m)];
    c.centers.col(k) += static_cast<double>(d.multiplicity[static_cast<std::size_t>(m)]) * d.points.col(m);
    mass[k] += static_cast<double>(d.multiplicity[static_cast<std::size_t>(m)]);
  }
  for (int k = 0; k < cc.count(); ++k) c.centers.col(k) /= mass[k];
  c.labels.resize(d.origin.size());
  for (std::size_t i = 0; i < d.origin.size(); ++i)
    c.labels[i] = cc.labels[static_cast<std::size_t>(d.origin[i])];
  return c;
}

/// Replaces every cc_tight component by one weighted representative.
WeightedDataSet merge(const WeightedDataSet& d, double eps) {
  const CcResult cc = cc_tight(d.points, eps);
  if (cc.count() == d.size()) return d;
  WeightedDataSet out;
  out.points = Matrix::Zero(d.points.rows(), cc.count());
  out.weights = Vector::Zero(cc.count());
  out.multiplicity.assign(static_cast<std::size_t>(cc.count()), 0);
  for (Eigen::Index m = 0; m < d.size(); ++m) {
    const int k = cc.labels[static_cast<std::size_t>(m)];
    out.points.col(k) += d.weights[m] * d.points.col(m);
    out.weights[k] += d.weights[m];
    out.multiplicity[static_cast<std::size_t>(k)] += d.multiplicity[static_cast<std::size_t>(m)];
  }
  for (int k = 0; k < cc.count(); ++k) {
    if (out.weights[k] > 0.0)
      out.points.col(k) /= out.weights[k];
    else
      out.points.col(k) = cc.representatives.col(k);
  }
  out.origin.resize(d.origin.size());
  for (std::size_t i = 0; i < d.origin.size(); ++i)
    out.origin[i] = cc.labels[static_cast<std::size_t>(d.origin[i])];
  return out;
}

BmsResult run(const DataSet& data, double sigma, const BmsConfig& cfg, const FilterSpec& filter, bool accelerate) {
  check_sigma(sigma);
  if (data.cols() == 0) throw InputError("blurring mean-shift needs at least one point");
  if (!(cfg.entropy_tol > 0.0)) throw InputError("entropy tolerance must be positive");
  if (cfg.max_iter < 0) throw InputError("max_iter must be nonnegative");
  const double eps = resolve_eps(cfg.merge_eps, sigma);

  BmsResult r;
  WeightedDataSet d = WeightedDataSet::uniform(data);
  d.validate();
  r.entropy.push_back(dataset_entropy(d, sigma));
  while (r.iterations < cfg.max_iter) {
    r.sizes.push_back(d.size());
    d = bms_step(d, sigma, filter);
    if (accelerate) d = merge(d, eps);
    ++r.iterations;
    const double h = dataset_entropy(d, sigma);
    const double change = std::abs(h - r.entropy.back());
    r.entropy.push_back(h);
    if (change <= cfg.entropy_tol * std::max(std::abs(h), 1.0)) {
      r.converged = true;
      break;
    }
  }
  if (!r.converged)
    r.warnings.push_back("reached max_iter = " + std::to_string(cfg.max_iter) + " before the entropy settled");
  r.clustering = pull_back(d, eps);
  r.final_data = std::move(d);
  return r;
}

}  // namespace

WeightedDataSet WeightedDataSet::uniform(const DataSet& data) {
  WeightedDataSet d;
  const Eigen::Index n = data.cols();
  d.points = data;
  d.weights = Vector::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  d.multiplicity.assign(static_cast<std::size_t>(n), 1);
  d.origin.resize(static_cast<std::size_t>(n));
  std::iota(d.origin.begin(), d.origin.end(), Eigen::Index{0});
  return d;
}

void WeightedDataSet::validate() const {
  const Eigen::Index m = size();
  if (weights.size() != m || static_cast<Eigen::Index>(multiplicity.size()) != m)
    throw InputError("weighted dataset: weight and multiplicity counts must match the point count");
  if (!points.allFinite()) throw InputError("weighted dataset: non-finite coordinates");
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12)
    throw InputError("weighted dataset: weights must be nonnegative and sum to one");
  long total = 0;
  for (long k : multiplicity) {
    if (k < 1) throw InputError("weighted dataset: multiplicities must be positive");
    total += k;
  }
  if (total != static_cast<long>(origin.size())) throw InputError("weighted dataset: multiplicities do not add up");
  for (Eigen::Index o : origin)
    if (o < 0 || o >= m) throw InputError("weighted dataset: origin map points outside the dataset");
}

FilterSpec FilterSpec::explicit_mix(double eta) {
  if (!std::isfinite(eta)) throw InputError("filter parameter must be finite");
  return FilterSpec{eta};
}

WeightedDataSet bms_step(const WeightedDataSet& data, double sigma, const FilterSpec& filter) {
  check_sigma(sigma);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  WeightedDataSet out = data;
  parallel_for(static_cast<std::size_t>(data.size()), [&](std::size_t i) {
    const auto m = static_cast<Eigen::Index>(i);
    Vector p;
    posterior_column(data, m, inv2s2, p);
    const Vector blurred = data.points * p;
    out.points.col(m) = (1.0 - filter.eta) * data.points.col(m) + filter.eta * blurred;
  });
  return out;
}

BmsResult bms_cluster(const DataSet& data, double sigma, const BmsConfig& cfg, const FilterSpec& filter) {
  return run(data, sigma, cfg, filter, false);
}

BmsResult bms_cluster_accelerated(const DataSet& data, double sigma, const BmsConfig& cfg) {
  return run(data, sigma, cfg, FilterSpec::standard(), true);
}

double gaussian_shrink_rate(double s, double sigma) {
  if (!(s > 0.0) || !(sigma > 0.0)) throw InputError("shrink rate needs positive s and sigma");
  const double q = sigma / s;
  return 1.0 / (1.0 + q * q);
}

double dataset_entropy(const WeightedDataSet& data, double sigma) {
  check_sigma(sigma);
  const Eigen::Index m = data.size();
  const double d = static_cast<double>(data.points.rows());
  const double log_norm = -0.5 * d * std::log(2.0 * M_PI * sigma * sigma);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> terms(static_cast<std::size_t>(m), 0.0);
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t i) {
    const auto a = static_cast<Eigen::Index>(i);
    if (!(data.weights[a] > 0.0)) return;
    double best = -std::numeric_limits<double>::infinity();
    Vector e(m);
    for (Eigen::Index b = 0; b < m; ++b) {
      e[b] = data.weights[b] > 0.0 ? std::log(data.weights[b]) - squared_distance(data.points.col(a), data.points.col(b)) * inv2s2
                                   : -std::numeric_limits<double>::infinity();
      best = std::max(best, e[b]);
    }
    const double log_p = log_norm + best + std::log((e.array() - best).exp().sum());
    terms[i] = -data.weights[a] * log_p;
  });
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

}  // namespace modeseek
