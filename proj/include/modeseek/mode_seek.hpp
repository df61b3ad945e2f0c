#pragma once

#include <optional>
#include <string>
#include <vector>

#include "modeseek/components.hpp"
#include "modeseek/kde.hpp"

namespace modeseek {

struct MsConfig {
  /// Stop when ||x+ - x|| <= tol * (1 + ||x||).
  double tol = 1e-6;
  int max_iter = 10000;
  /// Connected-components threshold for merging convergence points.
  /// Non-positive means "use sigma / 100".
  double merge_eps = 0.0;
  bool record_path = false;
};

enum class ModeStatus { Converged, MaxIter, StationaryNonMode };

std::string to_string(ModeStatus s);

/// One mode-seeking run.
struct ModeTrace {
  Vector start;
  Vector mode;
  int iterations = 0;
  int newton_steps = 0;
  ModeStatus status = ModeStatus::MaxIter;
  double last_step = 0.0;     ///< length of the final update
  std::vector<Vector> path;   ///< iterates after start, when record_path is set
};

/// Hard (and optionally soft) partition of N points into K clusters.
struct Clustering {
  Labels labels;               ///< per point, in [0, K)
  Matrix centers;              ///< D x K
  std::optional<Matrix> soft;  ///< N x K, rows on the simplex

  int count() const { return static_cast<int>(centers.cols()); }
};

struct ClusterDiagnostics {
  std::vector<int> iterations;             ///< per point
  std::vector<ModeStatus> status;          ///< per point
  std::vector<Eigen::Index> failed_points; ///< errored runs, kept as singleton clusters
  std::vector<std::string> warnings;
};

struct MsClustering {
  Clustering clustering;
  Matrix convergence_points;  ///< D x N final iterates
  ClusterDiagnostics diagnostics;
};

/// The merge threshold cfg.merge_eps resolves to for this model.
double resolve_merge_eps(const MsConfig& cfg, const KdeModel& model);

/// One mean-shift update f(x): the K'-weighted average of the data.
/// Gaussian scalar bandwidth gives sum_n p(n|x) x_n. With per-point
/// bandwidths the weights carry the extra 1/sigma_n^2 factor (the
/// adaptive update). Throws IsolatedPointError when no point lies in the
/// Epanechnikov window around x.
Vector ms_step(const KdeModel& model, const VectorCRef& x);

/// Adaptive update f(x) = sum_n q(n|x) x_n with q(n|x) ∝ p(n|x) / sigma_n^2.
/// Requires the Gaussian kernel and per-point bandwidths.
Vector ms_step_adaptive(const KdeModel& model, const VectorCRef& x);

/// Mean-shift weights of ms_step: nonnegative, summing to one.
Vector ms_weights(const KdeModel& model, const VectorCRef& x);

/// Iterates x <- f(x) from x0. Gaussian runs stop on the relative step rule;
/// Epanechnikov runs stop only at an exact fixed point.
ModeTrace find_mode(const KdeModel& model, const VectorCRef& x0, const MsConfig& cfg);

/// Mean-shift steps until the Hessian is negative definite, then modified
/// Newton steps on log p with eigenvalue flooring and step halving. Falls back
/// to one mean-shift step when 20 halvings fail to increase the density.
/// Converges when ||grad log p|| * sigma_min < tol or the Newton step falls
/// below the relative step tolerance. Gaussian kernel only.
ModeTrace find_mode_newton(const KdeModel& model, const VectorCRef& x0, const MsConfig& cfg);

/// Jacobian of the Gaussian mean-shift map:
/// (sum_n p(n|x) x_n x_n^T - f(x) f(x)^T) / sigma^2. Scalar bandwidth only.
Matrix ms_jacobian(const KdeModel& model, const VectorCRef& x);

/// Mean-shift clustering: a mode search from every point, then cc_tight on
/// the convergence points. Centers are means of the merged convergence points.
MsClustering ms_cluster(const KdeModel& model, const MsConfig& cfg);
MsClustering ms_cluster(const DataSet& data, Kernel kernel, Bandwidth bandwidth, const MsConfig& cfg);

struct OutOfSampleResult {
  std::optional<int> label;  ///< empty when the run ended away from every center
  bool new_mode = false;
  ModeTrace trace;
};

/// Runs mean-shift from x on the training KDE and maps the end point to the
/// nearest existing center within the merge threshold.
OutOfSampleResult out_of_sample_assign(const Clustering& clustering, const KdeModel& model,
                                       const VectorCRef& x, const MsConfig& cfg);

struct ConditionalMode {
  Vector y;
  double weight = 0.0;  ///< conditional mass of the starts that reached this mode
  Matrix error_bar;     ///< (-Hessian of log p(y|x0))^-1, PSD
};

/// Modes of p(y | x0) under a Gaussian joint KDE on stacked (x, y) columns:
/// the first `xdim` rows are x. Modes are listed by decreasing weight.
/// Throws OutOfSupportError when x0 is too far from every x_n.
std::vector<ConditionalMode> conditional_modes(const DataSet& pairs, Eigen::Index xdim, double sigma,
                                               const VectorCRef& x0, const MsConfig& cfg);

struct ScaleLevel {
  double sigma = 0.0;
  Matrix modes;                     ///< D x M
  std::vector<int> from_previous;   ///< for each previous-level mode, its mode here (-1: lost)
};

/// Scale-space mode tracking over an increasing bandwidth grid. The first
/// level searches from every data point; each later level searches from the
/// previous level's modes. Every level also searches from the data mean,
/// where the single large-scale mode sits, so modes born there are found.
std::vector<ScaleLevel> mode_continuation(const DataSet& data, const std::vector<double>& sigma_grid,
                                          const MsConfig& cfg);

}  // namespace modeseek
