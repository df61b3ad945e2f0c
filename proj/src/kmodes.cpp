#include "modeseek/kmodes.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "modeseek/error.hpp"
#include "modeseek/mode_seek.hpp"
#include "modeseek/parallel.hpp"

namespace modeseek {

HardAssignment::HardAssignment(Labels labels, int k) : labels_(std::move(labels)), k_(k) {
  if (k < 1) throw InputError("hard assignment needs at least one cluster");
  for (int l : labels_)
    if (l < 0 || l >= k) throw InputError("hard assignment label out of range");
}

HardAssignment HardAssignment::from_matrix(const MatrixCRef& z) {
  Labels labels(static_cast<std::size_t>(z.rows()), -1);
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    int ones = 0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      if (z(n, k) == 1.0) {
        ++ones;
        labels[static_cast<std::size_t>(n)] = static_cast<int>(k);
      } else if (z(n, k) != 0.0) {
        throw InputError("hard assignment entries must be 0 or 1");
      }
    }
    if (ones != 1) throw InputError("hard assignment row " + std::to_string(n) + " does not sum to one");
  }
  return HardAssignment(std::move(labels), static_cast<int>(z.cols()));
}

Matrix HardAssignment::matrix() const {
  Matrix z = Matrix::Zero(size(), k_);
  for (std::size_t n = 0; n < labels_.size(); ++n) z(static_cast<Eigen::Index>(n), labels_[n]) = 1.0;
  return z;
}

void SoftAssignment::validate() const {
  if (z.cols() < 1) throw InputError("soft assignment needs at least one cluster");
  if (!z.allFinite() || (z.array() < 0.0).any()) throw InputError("soft assignment entries must be nonnegative");
  for (Eigen::Index n = 0; n < z.rows(); ++n)
    if (std::abs(z.row(n).sum() - 1.0) > 1e-9)
      throw InputError("soft assignment row " + std::to_string(n) + " is not on the simplex");
}

Labels SoftAssignment::argmax() const {
  Labels out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    Eigen::Index k;
    z.row(n).maxCoeff(&k);
    out[static_cast<std::size_t>(n)] = static_cast<int>(k);
  }
  return out;
}

HomotopySchedule HomotopySchedule::geometric(double start, double end, int stages) {
  if (!(start > 0.0) || !(end > 0.0) || !std::isfinite(start) || !std::isfinite(end))
    throw InputError("homotopy bandwidths must be positive and finite");
  if (stages < 1) throw InputError("homotopy needs at least one stage");
  HomotopySchedule s;
  if (stages == 1 || start <= end) {
    s.sigmas.push_back(end);
    return s;
  }
  const double ratio = std::pow(end / start, 1.0 / (stages - 1));
  for (int i = 0; i < stages - 1; ++i) s.sigmas.push_back(start * std::pow(ratio, i));
  s.sigmas.push_back(end);
  return s;
}

HomotopySchedule HomotopySchedule::standard(const DataSet& data, double sigma) {
  return geometric(diameter(data), sigma, 10);
}

void HomotopySchedule::validate() const {
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0) || !std::isfinite(sigmas[i]))
      throw InputError("homotopy bandwidths must be positive and finite");
    if (i > 0 && !(sigmas[i] < sigmas[i - 1])) throw InputError("homotopy bandwidths must decrease strictly");
  }
  if (!kmeans_stage && sigmas.empty()) throw InputError("homotopy schedule has no stages");
}

Matrix farthest_point_seeds(const DataSet& data, int k) {
  const Eigen::Index n = data.cols();
  if (k < 1 || k > n) throw InputError("number of clusters must lie in [1, N]");
  const Vector mean = data.rowwise().mean();
  Eigen::Index first = 0;
  (data.colwise() - mean).colwise().squaredNorm().minCoeff(&first);
  Matrix seeds(data.rows(), k);
  seeds.col(0) = data.col(first);
  Vector nearest = (data.colwise() - data.col(first)).colwise().squaredNorm().transpose();
  for (int j = 1; j < k; ++j) {
    Eigen::Index next = 0;
    nearest.maxCoeff(&next);
    seeds.col(j) = data.col(next);
    nearest = nearest.cwiseMin((data.colwise() - data.col(next)).colwise().squaredNorm().transpose());
  }
  return seeds;
}

double kmodes_objective(const DataSet& data, const HardAssignment& z, const MatrixCRef& centroids, double sigma) {
  if (z.size() != data.cols()) throw InputError("assignment and data sizes differ");
  if (centroids.cols() != z.k() || centroids.rows() != data.rows())
    throw InputError("centroid matrix does not match the assignment");
  if (!(sigma > 0.0)) throw InputError("bandwidth must be positive");
  double s = 0.0;
  for (Eigen::Index n = 0; n < data.cols(); ++n)
    s += std::exp(-squared_distance(data.col(n), centroids.col(z[static_cast<std::size_t>(n)])) / (2.0 * sigma * sigma));
  return s / static_cast<double>(data.cols());
}

namespace {

/// Nearest centroid of every point, ties to the lowest index.
Labels nearest_centroids(const DataSet& data, const Matrix& c) {
  Labels out(static_cast<std::size_t>(data.cols()));
  parallel_for(out.size(), [&](std::size_t i) {
    Eigen::Index best = 0;
    (c.colwise() - data.col(static_cast<Eigen::Index>(i))).colwise().squaredNorm().minCoeff(&best);
    out[i] = static_cast<int>(best);
  });
  return out;
}

/// Moves the point least similar to every centroid into each empty cluster.
void reseed_empty(const DataSet& data, Matrix& c, Labels& labels, std::vector<std::string>& log) {
  const int k = static_cast<int>(c.cols());
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  for (int j = 0; j < k; ++j) {
    if (sizes[static_cast<std::size_t>(j)] > 0) continue;
    Eigen::Index pick = -1;
    double worst = -1.0;
    for (Eigen::Index n = 0; n < data.cols(); ++n) {
      const int from = labels[static_cast<std::size_t>(n)];
      if (sizes[static_cast<std::size_t>(from)] < 2) continue;
      const double d = (c.colwise() - data.col(n)).colwise().squaredNorm().minCoeff();
      if (d > worst) {
        worst = d;
        pick = n;
      }
    }
    if (pick < 0) continue;
    --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(pick)])];
    labels[static_cast<std::size_t>(pick)] = j;
    sizes[static_cast<std::size_t>(j)] = 1;
    c.col(j) = data.col(pick);
    log.push_back("cluster " + std::to_string(j) + " was empty; reseeded at point " + std::to_string(pick));
  }
}

DataSet members(const DataSet& data, const Labels& labels, int j) {
  std::vector<Eigen::Index> idx;
  for (std::size_t n = 0; n < labels.size(); ++n)
    if (labels[n] == j) idx.push_back(static_cast<Eigen::Index>(n));
  DataSet out(data.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = data.col(idx[i]);
  return out;
}

/// Mean-shift of one centroid on its cluster's KDE. A centroid stuck on a
/// saddle or minimum restarts from the member of highest density, kept only
/// if it improves the cluster's objective.
Vector cluster_mode(const DataSet& cluster, const Vector& start, double sigma, const MsConfig& ms) {
  const KdeModel model(cluster, Kernel::gaussian(), Bandwidth::scalar(sigma));
  ModeTrace t = find_mode(model, start, ms);
  if (t.status != ModeStatus::StationaryNonMode) return t.mode;
  Eigen::Index best = 0;
  double best_p = -1.0;
  for (Eigen::Index n = 0; n < cluster.cols(); ++n) {
    const double p = model.density(cluster.col(n));
    if (p > best_p) {
      best_p = p;
      best = n;
    }
  }
  ModeTrace alt = find_mode(model, cluster.col(best), ms);
  return model.density(alt.mode) > model.density(t.mode) ? alt.mode : t.mode;
}

}  // namespace

KmodesResult kmodes_fit(const DataSet& data, int k, const HomotopySchedule& schedule, const KmodesConfig& cfg) {
  if (data.cols() == 0 || !data.allFinite()) throw InputError("K-modes needs finite, nonempty data");
  if (k < 1 || k > data.cols()) throw InputError("number of clusters must lie in [1, N]");
  if (cfg.max_rounds < 1) throw InputError("max_rounds must be positive");
  schedule.validate();

  KmodesResult r;
  Matrix c = cfg.initial_centroids ? *cfg.initial_centroids : farthest_point_seeds(data, k);
  if (c.rows() != data.rows() || c.cols() != k) throw InputError("initial centroids have the wrong shape");
  Labels labels;

  if (schedule.kmeans_stage) {
    for (int round = 0; round < cfg.max_rounds; ++round) {
      Labels next = nearest_centroids(data, c);
      if (round > 0 && next == labels) break;
      labels = std::move(next);
      reseed_empty(data, c, labels, r.log);
      for (int j = 0; j < k; ++j) c.col(j) = members(data, labels, j).rowwise().mean();
      ++r.rounds;
    }
  } else {
    labels = nearest_centroids(data, c);
    reseed_empty(data, c, labels, r.log);
  }
  r.kmeans_labels = labels;

  MsConfig ms;
  ms.tol = cfg.ms_tol;
  ms.max_iter = cfg.ms_max_iter;
  for (double sigma : schedule.sigmas) {
    for (int round = 0; round < cfg.max_rounds; ++round) {
      Labels next = nearest_centroids(data, c);
      if (round > 0 && next == labels) break;
      labels = std::move(next);
      reseed_empty(data, c, labels, r.log);
      parallel_for(static_cast<std::size_t>(k), [&](std::size_t j) {
        const auto col = static_cast<Eigen::Index>(j);
        c.col(col) = cluster_mode(members(data, labels, static_cast<int>(j)), c.col(col), sigma, ms);
      });
      r.objective.push_back(kmodes_objective(data, HardAssignment(labels, k), c, sigma));
      ++r.rounds;
    }
  }
  r.assignment = HardAssignment(std::move(labels), k);
  r.centroids = std::move(c);
  return r;
}

}  // namespace modeseek
