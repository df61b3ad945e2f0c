#include "modeseek/components.hpp"

#include <cmath>

#include "modeseek/error.hpp"

namespace modeseek {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("connected components: eps must be positive");
}

template <typename Adjacent>
CcResult dfs_components(const MatrixCRef& points, Adjacent&& adjacent) {
  const Eigen::Index n = points.cols();
  CcResult out;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> stack;
  for (Eigen::Index root = 0; root < n; ++root) {
    if (out.labels[static_cast<std::size_t>(root)] >= 0) continue;
    const int label = out.count();
    out.members0.push_back(root);
    out.labels[static_cast<std::size_t>(root)] = label;
    stack.push_back(root);
    while (!stack.empty()) {
      const Eigen::Index v = stack.back();
      stack.pop_back();
      for (Eigen::Index u = 0; u < n; ++u) {
        if (out.labels[static_cast<std::size_t>(u)] >= 0) continue;
        if (adjacent(v, u)) {
          out.labels[static_cast<std::size_t>(u)] = label;
          stack.push_back(u);
        }
      }
    }
  }
  return out;
}

void fill_representatives(const MatrixCRef& points, CcResult& r) {
  r.representatives.resize(points.rows(), r.count());
  for (int k = 0; k < r.count(); ++k) r.representatives.col(k) = points.col(r.members0[static_cast<std::size_t>(k)]);
}

}  // namespace

bool within_distance(const VectorCRef& a, const VectorCRef& b, double eps) {
  const double limit = eps * eps;
  double acc = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    acc += diff * diff;
    if (acc >= limit) return false;
  }
  return acc < limit;
}

CcResult cc_naive(const MatrixCRef& points, double eps) {
  check_eps(eps);
  CcResult r = dfs_components(points, [&](Eigen::Index a, Eigen::Index b) {
    return within_distance(points.col(a), points.col(b), eps);
  });
  fill_representatives(points, r);
  return r;
}

CcResult cc_naive(const MatrixCRef& points, double eps, const Metric& metric) {
  check_eps(eps);
  CcResult r = dfs_components(points, [&](Eigen::Index a, Eigen::Index b) {
    return metric(points.col(a), points.col(b)) < eps;
  });
  fill_representatives(points, r);
  return r;
}

namespace {

template <typename Close>
CcResult tight_components(const MatrixCRef& points, bool try_previous_first, Close&& close) {
  const Eigen::Index n = points.cols();
  CcResult out;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  int previous = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    int assigned = -1;
    if (try_previous_first && previous >= 0 &&
        close(i, out.members0[static_cast<std::size_t>(previous)])) {
      assigned = previous;
    }
    for (int k = 0; assigned < 0 && k < out.count(); ++k) {
      if (k == previous && try_previous_first) continue;
      if (close(i, out.members0[static_cast<std::size_t>(k)])) assigned = k;
    }
    if (assigned < 0) {
      assigned = out.count();
      out.members0.push_back(i);
    }
    out.labels[static_cast<std::size_t>(i)] = assigned;
    previous = assigned;
  }
  return out;
}

}  // namespace

CcResult cc_tight(const MatrixCRef& points, double eps, bool try_previous_first) {
  check_eps(eps);
  CcResult r = tight_components(points, try_previous_first, [&](Eigen::Index a, Eigen::Index b) {
    return within_distance(points.col(a), points.col(b), eps);
  });
  fill_representatives(points, r);
  return r;
}

CcResult cc_tight(const MatrixCRef& points, double eps, const Metric& metric) {
  check_eps(eps);
  CcResult r = tight_components(points, false, [&](Eigen::Index a, Eigen::Index b) {
    return metric(points.col(a), points.col(b)) < eps;
  });
  fill_representatives(points, r);
  return r;
}

}  // namespace modeseek
