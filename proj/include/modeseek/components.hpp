#pragma once

#include <functional>
#include <vector>

#include "modeseek/types.hpp"

namespace modeseek {

using Labels = std::vector<int>;

/// Connected components of an epsilon-ball graph.
struct CcResult {
  Labels labels;                       ///< component of each point, in [0, count)
  std::vector<Eigen::Index> members0;  ///< index of each component's representative point
  Matrix representatives;              ///< D x K, column k is point members0[k]

  int count() const { return static_cast<int>(members0.size()); }
};

using Metric = std::function<double(const VectorCRef&, const VectorCRef&)>;

/// ||a - b|| < eps, accumulated dimension by dimension on squared values
/// and abandoned as soon as the partial sum reaches eps^2.
bool within_distance(const VectorCRef& a, const VectorCRef& b, double eps);

/// Exact components by depth-first search over all pairs (edge iff d < eps).
/// Components are numbered by their lowest point index.
CcResult cc_naive(const MatrixCRef& points, double eps);
CcResult cc_naive(const MatrixCRef& points, double eps, const Metric& metric);

/// Incremental representative-based components, O(DNK). Each point joins the
/// first component whose representative lies within eps, otherwise it opens a
/// new component and becomes its representative. Matches cc_naive whenever eps
/// exceeds every component diameter and is below every inter-component gap;
/// otherwise the result depends on point order.
///
/// With `try_previous_first`, the component of the previous point is tested
/// before scanning all representatives (raster-order images).
CcResult cc_tight(const MatrixCRef& points, double eps, bool try_previous_first = false);
CcResult cc_tight(const MatrixCRef& points, double eps, const Metric& metric);

}  // namespace modeseek
