#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "modeseek/error.hpp"
#include "modeseek/kmodes.hpp"
#include "modeseek/mode_seek.hpp"
#include "modeseek/parallel.hpp"

namespace modeseek {

AffinityGraph::AffinityGraph(Sparse w) : w_(std::move(w)) {
  if (w_.rows() != w_.cols()) throw InputError("affinity matrix must be square");
  w_.makeCompressed();
  const Sparse t = w_.transpose();
  double scale = 0.0;
  for (Eigen::Index j = 0; j < w_.outerSize(); ++j)
    for (Sparse::InnerIterator it(w_, j); it; ++it) {
      if (!std::isfinite(it.value()) || it.value() < 0.0)
        throw InputError("affinities must be nonnegative and finite");
      if (it.row() == it.col() && it.value() != 0.0) throw InputError("affinity matrix must have a zero diagonal");
      scale = std::max(scale, it.value());
    }
  if (Sparse(w_ - t).coeffs().cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0) && w_.nonZeros() > 0)
    throw InputError("affinity matrix must be symmetric");
  degree_ = Vector::Zero(w_.rows());
  for (Eigen::Index j = 0; j < w_.outerSize(); ++j)
    for (Sparse::InnerIterator it(w_, j); it; ++it) degree_[it.row()] += it.value();
}

AffinityGraph::Sparse AffinityGraph::laplacian() const {
  Sparse d(w_.rows(), w_.cols());
  std::vector<Eigen::Triplet<double>> diag;
  for (Eigen::Index n = 0; n < degree_.size(); ++n) diag.emplace_back(n, n, degree_[n]);
  d.setFromTriplets(diag.begin(), diag.end());
  return d - w_;
}

AffinityGraph knn_graph(const DataSet& data, int k, double sigma) {
  const Eigen::Index n = data.cols();
  if (k < 1 || k >= n) throw InputError("kNN graph needs 1 <= k < N");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("bandwidth must be positive and finite");
  std::vector<std::vector<std::pair<double, Eigen::Index>>> near(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const auto a = static_cast<Eigen::Index>(i);
    std::vector<std::pair<double, Eigen::Index>> d;
    d.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index b = 0; b < n; ++b)
      if (b != a) d.emplace_back(squared_distance(data.col(a), data.col(b)), b);
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    d.resize(static_cast<std::size_t>(k));
    near[i] = std::move(d);
  });
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index a = 0; a < n; ++a)
    for (const auto& [d2, b] : near[static_cast<std::size_t>(a)]) {
      const double w = std::exp(-d2 / (2.0 * sigma * sigma));
      trip.emplace_back(a, b, w);
      trip.emplace_back(b, a, w);
    }
  AffinityGraph::Sparse w(n, n);
  w.setFromTriplets(trip.begin(), trip.end(), [](double x, double y) { return std::max(x, y); });
  return AffinityGraph(std::move(w));
}

namespace {

Matrix similarities(const DataSet& data, const MatrixCRef& centroids, double sigma) {
  Matrix g(data.cols(), centroids.cols());
  for (Eigen::Index n = 0; n < data.cols(); ++n)
    for (Eigen::Index k = 0; k < centroids.cols(); ++k)
      g(n, k) = std::exp(-squared_distance(data.col(n), centroids.col(k)) / (2.0 * sigma * sigma));
  return g;
}

/// s_nk = -||x_n - c_k||^2 / (2 s0^2): the sigma -> infinity limit of G up to a constant.
Matrix kmeans_similarities(const DataSet& data, const MatrixCRef& centroids, double s0) {
  Matrix g(data.cols(), centroids.cols());
  for (Eigen::Index n = 0; n < data.cols(); ++n)
    for (Eigen::Index k = 0; k < centroids.cols(); ++k)
      g(n, k) = -squared_distance(data.col(n), centroids.col(k)) / (2.0 * s0 * s0);
  return g;
}

double trace_term(const Matrix& z, const AffinityGraph& graph) {
  return (z.transpose() * (graph.laplacian() * z)).trace();
}

double qp_objective(const Matrix& z, const MatrixCRef& s, double lambda, const AffinityGraph::Sparse& lap) {
  const double n = static_cast<double>(z.rows());
  const double quad = lambda > 0.0 ? lambda * (z.array() * (lap * z).array()).sum() : 0.0;
  return quad - (z.array() * s.array()).sum() / n;
}

/// Threshold theta such that max(v - theta, 0) sums to one; `sorted` is scratch space.
double simplex_threshold(const double* v, Eigen::Index stride, Eigen::Index k, std::vector<double>& sorted) {
  sorted.resize(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) sorted[static_cast<std::size_t>(j)] = v[j * stride];
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) theta = t;
  }
  return theta;
}

void project_rows(Matrix& z) {
  std::vector<double> scratch;
  const Eigen::Index k = z.cols(), stride = z.outerStride();
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    const double theta = simplex_threshold(&z(n, 0), stride, k, scratch);
    for (Eigen::Index j = 0; j < k; ++j) z(n, j) = std::max(z(n, j) - theta, 0.0);
  }
}

void check_graph(const AffinityGraph& graph, Eigen::Index n) {
  if (graph.size() != n) throw InputError("affinity graph size differs from the point count");
}

}  // namespace

double lap_kmodes_objective(const DataSet& data, const SoftAssignment& z, const MatrixCRef& centroids, double sigma,
                            double lambda, const AffinityGraph& graph, LaplacianForm form) {
  if (z.z.rows() != data.cols() || centroids.cols() != z.z.cols() || centroids.rows() != data.rows())
    throw InputError("assignment, centroids and data shapes do not match");
  if (!(lambda >= 0.0)) throw InputError("lambda must be nonnegative");
  if (!(sigma > 0.0)) throw InputError("bandwidth must be positive");
  check_graph(graph, data.cols());
  double smooth = 0.0;
  if (form == LaplacianForm::Trace) {
    smooth = trace_term(z.z, graph);
  } else {
    const auto& w = graph.weights();
    for (Eigen::Index j = 0; j < w.outerSize(); ++j)
      for (AffinityGraph::Sparse::InnerIterator it(w, j); it; ++it)
        smooth += it.value() * (z.z.row(it.row()) - z.z.row(it.col())).squaredNorm();
    smooth *= 0.5;
  }
  const Matrix g = similarities(data, centroids, sigma);
  return lambda * smooth - (z.z.array() * g.array()).sum() / static_cast<double>(data.cols());
}

Vector simplex_project(const VectorCRef& v) {
  if (v.size() == 0) throw InputError("cannot project an empty vector");
  if (!v.allFinite()) throw InputError("cannot project a non-finite vector");
  std::vector<double> scratch;
  const double theta = simplex_threshold(v.data(), 1, v.size(), scratch);
  return (v.array() - theta).max(0.0);
}

AssignmentStepResult lap_assignment_qp(const MatrixCRef& similarity, double lambda, const AffinityGraph& graph,
                                       const SoftAssignment& z_init, const AssignmentConfig& cfg) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be nonnegative and finite");
  if (z_init.z.rows() != similarity.rows() || z_init.z.cols() != similarity.cols())
    throw InputError("initial assignment does not match the similarity matrix");
  check_graph(graph, similarity.rows());
  z_init.validate();

  const AffinityGraph::Sparse lap = graph.laplacian();
  const double n = static_cast<double>(similarity.rows());
  const double step = 1.0 / (2.0 * lambda * graph.laplacian_bound() + cfg.step_slack);
  const Matrix linear = similarity / n;
  // L Z is carried along with every iterate so each iteration needs one sparse product.
  auto times_l = [&](const Matrix& z) -> Matrix { return lambda > 0.0 ? Matrix(lap * z) : Matrix::Zero(z.rows(), z.cols()); };
  auto objective = [&](const Matrix& z, const Matrix& lz) {
    return lambda * (z.array() * lz.array()).sum() - (z.array() * linear.array()).sum();
  };
  auto descend = [&](const Matrix& y, const Matrix& ly) {
    Matrix next = y - step * (2.0 * lambda * ly - linear);
    project_rows(next);
    return next;
  };

  // Accelerated projected gradient; the momentum restarts whenever the
  // objective would go up, so accepted iterates never increase it.
  AssignmentStepResult r;
  Matrix z = z_init.z, lz = times_l(z);
  Matrix y = z, ly = lz;
  double f = objective(z, lz);
  double t = 1.0;
  while (r.iterations < cfg.max_iter) {
    Matrix next = descend(y, ly);
    Matrix lnext = times_l(next);
    const double f_next = objective(next, lnext);
    ++r.iterations;
    if (f_next > f) {
      if (t == 1.0) {
        // Rounding-level increase from a plain step: z is as good as it gets.
        r.converged = (z - descend(z, lz)).norm() / step < cfg.gradient_tol;
        break;
      }
      t = 1.0;
      y = z;
      ly = lz;
      continue;
    }
    const double decrease = f - f_next;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    y = next + beta * (next - z);
    ly = lnext + beta * (lnext - lz);
    t = t_next;
    z = std::move(next);
    lz = std::move(lnext);
    f = f_next;
    if (decrease < cfg.decrease_tol && (z - descend(z, lz)).norm() / step < cfg.gradient_tol) {
      r.converged = true;
      break;
    }
  }
  r.projected_gradient_norm = (z - descend(z, lz)).norm() / step;
  r.objective = f;
  r.z.z = std::move(z);
  return r;
}

AssignmentStepResult lap_kmodes_assignment_step(const DataSet& data, const MatrixCRef& centroids, double sigma,
                                                double lambda, const AffinityGraph& graph,
                                                const SoftAssignment& z_init, const AssignmentConfig& cfg) {
  if (centroids.rows() != data.rows()) throw InputError("centroid dimension differs from the data");
  if (!(sigma > 0.0)) throw InputError("bandwidth must be positive");
  return lap_assignment_qp(similarities(data, centroids, sigma), lambda, graph, z_init, cfg);
}

namespace {

/// Point with the lowest best similarity to the current centroids.
Eigen::Index least_covered(const DataSet& data, const Matrix& c) {
  Eigen::Index pick = 0;
  double worst = -1.0;
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    const double d = (c.colwise() - data.col(n)).colwise().squaredNorm().minCoeff();
    if (d > worst) {
      worst = d;
      pick = n;
    }
  }
  return pick;
}

}  // namespace

LapKmodesResult lap_kmodes_fit(const DataSet& data, int k, double sigma, double lambda, const AffinityGraph& graph,
                               const HomotopySchedule& schedule, const LapKmodesConfig& cfg) {
  if (data.cols() == 0 || !data.allFinite()) throw InputError("Laplacian K-modes needs finite, nonempty data");
  if (k < 1 || k > data.cols()) throw InputError("number of clusters must lie in [1, N]");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("bandwidth must be positive and finite");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be nonnegative and finite");
  if (cfg.max_rounds < 1) throw InputError("max_rounds must be positive");
  check_graph(graph, data.cols());
  schedule.validate();

  std::vector<double> stages;
  for (double s : schedule.sigmas)
    if (s > sigma) stages.push_back(s);
  stages.push_back(sigma);
  const double s0 = stages.front();

  LapKmodesResult r;
  Matrix c = cfg.initial_centroids ? *cfg.initial_centroids : farthest_point_seeds(data, k);
  if (c.rows() != data.rows() || c.cols() != k) throw InputError("initial centroids have the wrong shape");
  r.assignment.z = Matrix::Zero(data.cols(), k);
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    Eigen::Index best = 0;
    (c.colwise() - data.col(n)).colwise().squaredNorm().minCoeff(&best);
    r.assignment.z(n, best) = 1.0;
  }

  auto fix_empty = [&](double floor) {
    for (int j = 0; j < k; ++j) {
      if (r.assignment.z.col(j).sum() > floor) continue;
      const Eigen::Index pick = least_covered(data, c);
      c.col(j) = data.col(pick);
      r.assignment.z.row(pick).setZero();
      r.assignment.z(pick, j) = 1.0;
      r.log.push_back("cluster " + std::to_string(j) + " lost all mass; reseeded at point " + std::to_string(pick));
    }
  };
  constexpr double kEmpty = 1e-12;

  auto run_stage = [&](auto&& similarity_of, auto&& update_centroids) {
    double previous = std::numeric_limits<double>::infinity();
    for (int round = 0; round < cfg.max_rounds; ++round) {
      const Matrix s = similarity_of(c);
      AssignmentStepResult step = lap_assignment_qp(s, lambda, graph, r.assignment, cfg.assignment);
      if (!step.converged) r.log.push_back("assignment step hit its iteration limit");
      r.assignment = std::move(step.z);
      fix_empty(kEmpty);
      update_centroids();
      const AffinityGraph::Sparse lap = graph.laplacian();
      const double f = qp_objective(r.assignment.z, similarity_of(c), lambda, lap);
      r.objective.push_back(f);
      ++r.rounds;
      if (previous - f < cfg.objective_tol * std::max(std::abs(f), 1.0)) break;
      previous = f;
    }
  };

  if (schedule.kmeans_stage) {
    run_stage([&](const Matrix& cc) { return kmeans_similarities(data, cc, s0); },
              [&] {
                for (int j = 0; j < k; ++j) {
                  const Vector w = r.assignment.z.col(j);
                  c.col(j) = data * w / w.sum();
                }
              });
  }

  MsConfig ms;
  ms.tol = cfg.ms_tol;
  ms.max_iter = cfg.ms_max_iter;
  for (double s : stages) {
    run_stage([&](const Matrix& cc) { return similarities(data, cc, s); },
              [&] {
                parallel_for(static_cast<std::size_t>(k), [&](std::size_t j) {
                  const auto col = static_cast<Eigen::Index>(j);
                  const KdeModel model(data, Kernel::gaussian(), Bandwidth::scalar(s), r.assignment.z.col(col));
                  c.col(col) = find_mode(model, c.col(col), ms).mode;
                });
              });
  }
  r.centroids = std::move(c);
  r.sigma = sigma;
  return r;
}

AffinityFn knn_affinity(const DataSet& train, int k, double sigma) {
  if (k < 1 || k > train.cols()) throw InputError("kNN affinity needs 1 <= k <= N");
  if (!(sigma > 0.0)) throw InputError("bandwidth must be positive");
  return [train, k, sigma](const VectorCRef& x) {
    std::vector<std::pair<double, Eigen::Index>> d;
    d.reserve(static_cast<std::size_t>(train.cols()));
    for (Eigen::Index n = 0; n < train.cols(); ++n) d.emplace_back(squared_distance(x, train.col(n)), n);
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    std::vector<std::pair<Eigen::Index, double>> out;
    for (int i = 0; i < k; ++i) {
      const double w = std::exp(-d[static_cast<std::size_t>(i)].first / (2.0 * sigma * sigma));
      if (w > 0.0) out.emplace_back(d[static_cast<std::size_t>(i)].second, w);
    }
    return out;
  };
}

OutOfSampleSoft lap_kmodes_out_of_sample(const VectorCRef& x, const LapKmodesResult& model,
                                         const AffinityFn& affinity) {
  const Eigen::Index k = model.centroids.cols();
  if (x.size() != model.centroids.rows()) throw InputError("query dimension differs from the model");
  Vector g(k);
  for (Eigen::Index j = 0; j < k; ++j)
    g[j] = -squared_distance(x, model.centroids.col(j)) / (2.0 * model.sigma * model.sigma);
  g = (g.array() - g.maxCoeff()).exp();
  g /= g.sum();

  OutOfSampleSoft out;
  Vector zbar = Vector::Zero(k);
  double total = 0.0;
  for (const auto& [n, w] : affinity(x)) {
    if (n < 0 || n >= model.assignment.z.rows()) throw InputError("affinity refers to an unknown training point");
    zbar += w * model.assignment.z.row(n).transpose();
    total += w;
  }
  if (!(total > 0.0)) {
    out.z = g;
    out.centroid_only = true;
    return out;
  }
  out.z = simplex_project(0.5 * (zbar / total + g));
  return out;
}

}  // namespace modeseek
