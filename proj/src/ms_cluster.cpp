#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

#include "modeseek/error.hpp"
#include "modeseek/mode_seek.hpp"
#include "modeseek/parallel.hpp"
#include "detail.hpp"

namespace modeseek {

namespace detail {

Clustering merge_end_points(const DataSet& data, const Matrix& ends_all, const std::vector<Eigen::Index>& failed,
                            double eps, bool raster_order) {
  const Eigen::Index n = data.cols();
  std::vector<char> is_failed(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i : failed) is_failed[static_cast<std::size_t>(i)] = 1;
  std::vector<Eigen::Index> ok;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!is_failed[static_cast<std::size_t>(i)]) ok.push_back(i);

  Matrix ends(data.rows(), static_cast<Eigen::Index>(ok.size()));
  for (std::size_t k = 0; k < ok.size(); ++k) ends.col(static_cast<Eigen::Index>(k)) = ends_all.col(ok[k]);
  CcResult cc = ok.empty() ? CcResult{} : cc_tight(ends, eps, raster_order);

  const int k_ok = cc.count();
  const int k_total = k_ok + static_cast<int>(failed.size());
  Clustering c;
  c.labels.assign(static_cast<std::size_t>(n), -1);
  c.centers = Matrix::Zero(data.rows(), k_total);
  std::vector<int> sizes(static_cast<std::size_t>(k_total), 0);
  for (std::size_t k = 0; k < ok.size(); ++k) {
    const int label = cc.labels[k];
    c.labels[static_cast<std::size_t>(ok[k])] = label;
    c.centers.col(label) += ends.col(static_cast<Eigen::Index>(k));
    ++sizes[static_cast<std::size_t>(label)];
  }
  int next = k_ok;
  for (Eigen::Index i : failed) {
    c.labels[static_cast<std::size_t>(i)] = next;
    c.centers.col(next) = data.col(i);
    ++next;
  }
  for (int k = 0; k < k_ok; ++k) c.centers.col(k) /= sizes[static_cast<std::size_t>(k)];
  return c;
}

}  // namespace detail

double resolve_merge_eps(const MsConfig& cfg, const KdeModel& model) {
  if (cfg.merge_eps > 0.0) return cfg.merge_eps;
  return model.bandwidth().min() / 100.0;
}

MsClustering ms_cluster(const KdeModel& model, const MsConfig& cfg) {
  const Eigen::Index n = model.size();
  const double eps = resolve_merge_eps(cfg, model);
  MsClustering out;
  out.convergence_points = model.data();
  auto& diag = out.diagnostics;
  diag.iterations.assign(static_cast<std::size_t>(n), 0);
  diag.status.assign(static_cast<std::size_t>(n), ModeStatus::MaxIter);
  std::vector<char> failed(static_cast<std::size_t>(n), 0);

  MsConfig run = cfg;
  run.record_path = false;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const auto col = static_cast<Eigen::Index>(i);
    try {
      ModeTrace t = find_mode(model, model.data().col(col), run);
      out.convergence_points.col(col) = t.mode;
      diag.iterations[i] = t.iterations;
      diag.status[i] = t.status;
    } catch (const NumericalError&) {
      failed[i] = 1;
    }
  });

  for (Eigen::Index i = 0; i < n; ++i)
    if (failed[static_cast<std::size_t>(i)]) diag.failed_points.push_back(i);
  const double diam = diameter(model.data());
  if (eps < 10.0 * cfg.tol * diam)
    diag.warnings.push_back("merge threshold is below 10 * tol * dataset diameter; clusters may split");
  if (!diag.failed_points.empty())
    diag.warnings.push_back(std::to_string(diag.failed_points.size()) +
                            " point(s) had no neighbors in the kernel window and form singleton clusters");

  out.clustering = detail::merge_end_points(model.data(), out.convergence_points, diag.failed_points, eps, false);
  return out;
}

MsClustering ms_cluster(const DataSet& data, Kernel kernel, Bandwidth bandwidth, const MsConfig& cfg) {
  return ms_cluster(KdeModel(data, kernel, std::move(bandwidth)), cfg);
}

OutOfSampleResult out_of_sample_assign(const Clustering& clustering, const KdeModel& model,
                                       const VectorCRef& x, const MsConfig& cfg) {
  if (clustering.centers.rows() != model.dim()) throw InputError("clustering and model dimensions differ");
  OutOfSampleResult r;
  r.trace = find_mode(model, x, cfg);
  const double eps = resolve_merge_eps(cfg, model);
  double best = eps;
  for (int k = 0; k < clustering.count(); ++k) {
    const double d = (clustering.centers.col(k) - r.trace.mode).norm();
    if (d < best) {
      best = d;
      r.label = k;
    }
  }
  r.new_mode = !r.label.has_value();
  return r;
}

std::vector<ConditionalMode> conditional_modes(const DataSet& pairs, Eigen::Index xdim, double sigma,
                                               const VectorCRef& x0, const MsConfig& cfg) {
  if (xdim <= 0 || xdim >= pairs.rows()) throw InputError("conditional modes: x dimension must leave room for y");
  if (x0.size() != xdim) throw InputError("conditional modes: query has the wrong dimension");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("bandwidth must be positive and finite");
  const Eigen::Index n = pairs.cols();
  const Eigen::Index ydim = pairs.rows() - xdim;

  Vector exponent(n);
  for (Eigen::Index i = 0; i < n; ++i)
    exponent[i] = (pairs.col(i).head(xdim) - x0).squaredNorm() / (2.0 * sigma * sigma);
  const double closest = exponent.minCoeff();
  if (!(std::exp(-closest) >= DBL_MIN))
    throw OutOfSupportError("query lies outside the support of the training inputs");
  Vector w = (-(exponent.array() - closest)).exp();
  w /= w.sum();

  const DataSet ys = pairs.bottomRows(ydim);
  const KdeModel model(ys, Kernel::gaussian(), Bandwidth::scalar(sigma), w);

  std::vector<ModeTrace> runs(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    runs[i] = find_mode(model, ys.col(static_cast<Eigen::Index>(i)), cfg);
  });

  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i)
    if (runs[static_cast<std::size_t>(i)].status == ModeStatus::Converged) kept.push_back(i);
  Matrix ends(ydim, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k)
    ends.col(static_cast<Eigen::Index>(k)) = runs[static_cast<std::size_t>(kept[k])].mode;
  if (kept.empty()) return {};
  const CcResult cc = cc_tight(ends, resolve_merge_eps(cfg, model));

  std::vector<ConditionalMode> modes(static_cast<std::size_t>(cc.count()));
  for (std::size_t k = 0; k < kept.size(); ++k) modes[static_cast<std::size_t>(cc.labels[k])].weight += w[kept[k]];
  for (int k = 0; k < cc.count(); ++k) {
    ConditionalMode& m = modes[static_cast<std::size_t>(k)];
    m.y = cc.representatives.col(k);
    const double p = model.density(m.y);
    const Vector g = model.gradient(m.y) / p;
    const Matrix neg = -(model.hessian(m.y) / p - g * g.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (neg + neg.transpose()));
    Vector inv = eig.eigenvalues();
    for (Eigen::Index i = 0; i < inv.size(); ++i) inv[i] = inv[i] > 0.0 ? 1.0 / inv[i] : 0.0;
    m.error_bar = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const ConditionalMode& a, const ConditionalMode& b) { return a.weight > b.weight; });
  return modes;
}

std::vector<ScaleLevel> mode_continuation(const DataSet& data, const std::vector<double>& sigma_grid,
                                          const MsConfig& cfg) {
  if (sigma_grid.empty()) throw InputError("bandwidth grid is empty");
  for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
    if (!(sigma_grid[i] > 0.0) || !std::isfinite(sigma_grid[i]))
      throw InputError("bandwidths must be positive and finite");
    if (i > 0 && !(sigma_grid[i] > sigma_grid[i - 1])) throw InputError("bandwidth grid must be increasing");
  }
  const Vector mean = data.rowwise().mean();
  std::vector<ScaleLevel> levels;
  Matrix previous = data;
  for (std::size_t level = 0; level < sigma_grid.size(); ++level) {
    const KdeModel model(data, Kernel::gaussian(), Bandwidth::scalar(sigma_grid[level]));
    const Eigen::Index n_seeds = previous.cols() + 1;
    std::vector<ModeTrace> runs(static_cast<std::size_t>(n_seeds));
    parallel_for(static_cast<std::size_t>(n_seeds), [&](std::size_t i) {
      const auto col = static_cast<Eigen::Index>(i);
      runs[i] = find_mode_newton(model, col < previous.cols() ? Vector(previous.col(col)) : mean, cfg);
    });

    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < n_seeds; ++i)
      if (runs[static_cast<std::size_t>(i)].status != ModeStatus::StationaryNonMode) kept.push_back(i);
    Matrix ends(data.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k)
      ends.col(static_cast<Eigen::Index>(k)) = runs[static_cast<std::size_t>(kept[k])].mode;
    const CcResult cc = cc_tight(ends, resolve_merge_eps(cfg, model));

    ScaleLevel out;
    out.sigma = sigma_grid[level];
    out.modes.resize(data.rows(), cc.count());
    std::vector<double> best(static_cast<std::size_t>(cc.count()), -1.0);
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const int label = cc.labels[k];
      const double p = model.density(ends.col(static_cast<Eigen::Index>(k)));
      if (p > best[static_cast<std::size_t>(label)]) {
        best[static_cast<std::size_t>(label)] = p;
        out.modes.col(label) = ends.col(static_cast<Eigen::Index>(k));
      }
    }
    if (level > 0) {
      out.from_previous.assign(static_cast<std::size_t>(previous.cols()), -1);
      for (std::size_t k = 0; k < kept.size(); ++k)
        if (kept[k] < previous.cols()) out.from_previous[static_cast<std::size_t>(kept[k])] = cc.labels[k];
    }
    previous = out.modes;
    levels.push_back(std::move(out));
  }
  return levels;
}

}  // namespace modeseek
