#include "modeseek/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "modeseek/error.hpp"
#include "modeseek/kde.hpp"
#include "modeseek/mode_seek.hpp"
#include "modeseek/parallel.hpp"

namespace modeseek {

void MbmsConfig::validate(Eigen::Index d, Eigen::Index n) const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("MBMS bandwidth must be positive and finite");
  if (L < 0 || L >= d) throw InputError("tangent dimension must satisfy 0 <= L < D");
  if (k < L + 1) throw InputError("local PCA needs k >= L + 1 neighbours");
  if (k > n - 1) throw InputError("local PCA needs k <= N - 1");
  if (max_iter < 0) throw InputError("max_iter must be nonnegative");
  if (!(stop_ratio >= 0.0)) throw InputError("stop_ratio must be nonnegative");
}

TangentSpace local_tangent(const DataSet& data, Eigen::Index n, int k, int L) {
  const Eigen::Index count = data.cols(), d = data.rows();
  if (n < 0 || n >= count) throw InputError("point index out of range");
  if (k < 1 || k > count - 1) throw InputError("local PCA needs 1 <= k <= N - 1");
  if (L < 0 || L >= d) throw InputError("tangent dimension must satisfy 0 <= L < D");

  std::vector<std::pair<double, Eigen::Index>> dist;
  dist.reserve(static_cast<std::size_t>(count - 1));
  for (Eigen::Index m = 0; m < count; ++m)
    if (m != n) dist.emplace_back(squared_distance(data.col(n), data.col(m)), m);
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  Matrix hood(d, k + 1);
  hood.col(0) = data.col(n);
  for (int i = 0; i < k; ++i) hood.col(i + 1) = data.col(dist[static_cast<std::size_t>(i)].second);

  TangentSpace t;
  t.base = hood.rowwise().mean();
  const Matrix centred = hood.colwise() - t.base;
  const Matrix cov = centred * centred.transpose() / static_cast<double>(k + 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  // Eigen sorts ascending; reverse to descending.
  t.eigenvalues = eig.eigenvalues().reverse();
  t.basis = eig.eigenvectors().rowwise().reverse().leftCols(L);
  if (L > 0) {
    const double top = std::max(t.eigenvalues[0], 0.0);
    t.degenerate = !(t.eigenvalues[L - 1] > 1e-12 * top) || top == 0.0;
  }
  return t;
}

double normal_to_tangent_ratio(const TangentSpace& t) {
  const Eigen::Index l = t.basis.cols();
  const Vector ev = t.eigenvalues.cwiseMax(0.0);
  const double tangent = ev.head(l).sum(), normal = ev.tail(ev.size() - l).sum();
  if (tangent > 0.0) return normal / tangent;
  return normal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

namespace {

struct StepOutcome {
  DataSet data;
  double mean_ratio = 0.0;
  int degenerate = 0;
};

StepOutcome step(const DataSet& data, const MbmsConfig& cfg) {
  const KdeModel model(data, Kernel::gaussian(), Bandwidth::scalar(cfg.sigma));
  StepOutcome out;
  out.data = data;
  std::vector<double> ratios(static_cast<std::size_t>(data.cols()));
  std::vector<char> degenerate(static_cast<std::size_t>(data.cols()), 0);
  parallel_for(static_cast<std::size_t>(data.cols()), [&](std::size_t i) {
    const auto n = static_cast<Eigen::Index>(i);
    const TangentSpace t = local_tangent(data, n, cfg.k, cfg.L);
    ratios[i] = normal_to_tangent_ratio(t);
    degenerate[i] = t.degenerate ? 1 : 0;
    Vector v = ms_step(model, data.col(n)) - data.col(n);
    // Two passes keep the tangential residual at rounding level.
    for (int pass = 0; pass < 2 && cfg.L > 0; ++pass) v -= t.basis * (t.basis.transpose() * v);
    out.data.col(n) += v;
  });
  out.mean_ratio = std::accumulate(ratios.begin(), ratios.end(), 0.0) / static_cast<double>(ratios.size());
  out.degenerate = static_cast<int>(std::count(degenerate.begin(), degenerate.end(), 1));
  return out;
}

}  // namespace

DataSet mbms_step(const DataSet& data, const MbmsConfig& cfg) {
  cfg.validate(data.rows(), data.cols());
  return step(data, cfg).data;
}

MbmsResult mbms_run(const DataSet& data, const MbmsConfig& cfg) {
  cfg.validate(data.rows(), data.cols());
  MbmsResult r;
  r.data = data;
  while (r.iterations < cfg.max_iter) {
    StepOutcome s = step(r.data, cfg);
    r.ratios.push_back(s.mean_ratio);
    if (s.mean_ratio < cfg.stop_ratio) {
      r.stopped_by_ratio = true;
      break;
    }
    r.data = std::move(s.data);
    r.degenerate_tangents += s.degenerate;
    ++r.iterations;
  }
  return r;
}

}  // namespace modeseek
