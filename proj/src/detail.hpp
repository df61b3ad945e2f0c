#pragma once

#include <vector>

#include "modeseek/mode_seek.hpp"

namespace modeseek::detail {

/// Relative step rule shared by the mean-shift loops.
bool small_step(double step, const VectorCRef& x, double tol);

/// Converged, or StationaryNonMode when a Gaussian end point is not a maximum.
ModeStatus classify_end_point(const KdeModel& model, const VectorCRef& x);

/// cc_tight on the end points of the successful runs; failed runs become
/// singleton clusters at their data point. Centers are component means.
Clustering merge_end_points(const DataSet& data, const Matrix& ends, const std::vector<Eigen::Index>& failed,
                            double eps, bool raster_order);

}  // namespace modeseek::detail
