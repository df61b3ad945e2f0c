#pragma once

#include <Eigen/SparseCore>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "modeseek/components.hpp"
#include "modeseek/types.hpp"

namespace modeseek {

/// Each point belongs to exactly one of K clusters.
class HardAssignment {
 public:
  HardAssignment() = default;
  /// Throws InputError unless every label is in [0, k).
  HardAssignment(Labels labels, int k);
  /// Throws InputError unless Z is 0/1 with rows summing to one.
  static HardAssignment from_matrix(const MatrixCRef& z);

  const Labels& labels() const { return labels_; }
  int k() const { return k_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(labels_.size()); }
  int operator[](std::size_t n) const { return labels_[n]; }
  Matrix matrix() const;  ///< N x K indicator

 private:
  Labels labels_;
  int k_ = 0;
};

/// Rows on the probability simplex (within 1e-9).
struct SoftAssignment {
  Matrix z;  ///< N x K

  void validate() const;
  /// Row argmax, ties to the lowest index.
  Labels argmax() const;
};

/// Sparse symmetric nonnegative affinities with zero diagonal.
class AffinityGraph {
 public:
  using Sparse = Eigen::SparseMatrix<double>;

  AffinityGraph() = default;
  /// Throws InputError if W is not square, symmetric, nonnegative with zero diagonal.
  explicit AffinityGraph(Sparse w);

  const Sparse& weights() const { return w_; }
  const Vector& degree() const { return degree_; }
  Eigen::Index size() const { return w_.rows(); }
  Sparse laplacian() const;
  /// Gershgorin bound 2 max_n d_n on the largest Laplacian eigenvalue.
  double laplacian_bound() const { return degree_.size() ? 2.0 * degree_.maxCoeff() : 0.0; }

 private:
  Sparse w_;
  Vector degree_;
};

/// Symmetric kNN graph: n and m are linked when either is among the other's
/// k nearest neighbours, with weight exp(-||x_n - x_m||^2 / 2 sigma^2).
AffinityGraph knn_graph(const DataSet& data, int k, double sigma);

/// Bandwidths for the stages after the sigma = infinity (K-means) stage.
struct HomotopySchedule {
  bool kmeans_stage = true;
  std::vector<double> sigmas;  ///< strictly decreasing, positive

  /// `stages` values geometrically spaced from `start` down to `end`.
  static HomotopySchedule geometric(double start, double end, int stages);
  /// Ten stages from the dataset diameter down to sigma.
  static HomotopySchedule standard(const DataSet& data, double sigma);
  void validate() const;
};

struct KmodesConfig {
  int max_rounds = 100;         ///< alternation rounds per stage
  double ms_tol = 1e-8;         ///< relative step tolerance of the centroid mean-shift
  int ms_max_iter = 1000;
  std::optional<Matrix> initial_centroids;  ///< D x K; farthest-point seeding otherwise
};

struct KmodesResult {
  HardAssignment assignment;
  Matrix centroids;            ///< D x K
  Labels kmeans_labels;        ///< assignment at the end of the K-means stage
  std::vector<double> objective;  ///< after every round of the finite-sigma stages
  int rounds = 0;
  std::vector<std::string> log;
};

/// Deterministic seeding: the point nearest the data mean, then repeatedly
/// the point farthest from the chosen ones (ties to the lowest index).
Matrix farthest_point_seeds(const DataSet& data, int k);

/// (1/N) sum_k sum_n z_nk G(||(x_n - c_k)/sigma||^2), G(t) = exp(-t/2).
double kmodes_objective(const DataSet& data, const HardAssignment& z, const MatrixCRef& centroids, double sigma);

/// K-means, then K-modes down the homotopy schedule. Each round assigns
/// points to the most similar centroid and moves every centroid to a mode
/// of its own cluster's KDE by mean-shift from its current position.
KmodesResult kmodes_fit(const DataSet& data, int k, const HomotopySchedule& schedule, const KmodesConfig& cfg);

enum class LaplacianForm { Pairwise, Trace };

/// lambda/2 sum_nm w_nm ||z_n - z_m||^2 - (1/N) sum_nk z_nk G(||(x_n - c_k)/sigma||^2).
double lap_kmodes_objective(const DataSet& data, const SoftAssignment& z, const MatrixCRef& centroids, double sigma,
                            double lambda, const AffinityGraph& graph, LaplacianForm form = LaplacianForm::Pairwise);

/// Euclidean projection onto {z >= 0, sum z = 1}.
Vector simplex_project(const VectorCRef& v);

struct AssignmentConfig {
  /// Stop once a step lowers the objective by less than decrease_tol and the
  /// projected-gradient norm is below gradient_tol.
  double decrease_tol = 1e-9;
  double gradient_tol = 1e-6;
  int max_iter = 20000;
  double step_slack = 1e-12;   ///< delta in the step 1 / (2 lambda L_max + delta)
};

struct AssignmentStepResult {
  SoftAssignment z;
  int iterations = 0;
  double objective = 0.0;
  double projected_gradient_norm = 0.0;
  bool converged = false;  ///< both stopping tests passed before max_iter
};

/// Minimizes lambda tr(Z^T L Z) - (1/N) sum_nk z_nk s_nk over row-simplex Z by
/// projected gradient, for an arbitrary N x K similarity matrix S.
AssignmentStepResult lap_assignment_qp(const MatrixCRef& similarity, double lambda, const AffinityGraph& graph,
                                       const SoftAssignment& z_init, const AssignmentConfig& cfg = {});

/// The assignment step of Laplacian K-modes: centroids fixed, S = G.
AssignmentStepResult lap_kmodes_assignment_step(const DataSet& data, const MatrixCRef& centroids, double sigma,
                                                double lambda, const AffinityGraph& graph,
                                                const SoftAssignment& z_init, const AssignmentConfig& cfg = {});

struct LapKmodesConfig {
  int max_rounds = 100;
  /// Stop a stage when a round lowers the objective by less than objective_tol * max(|f|, 1).
  double objective_tol = 1e-7;
  double ms_tol = 1e-8;
  int ms_max_iter = 1000;
  /// Rounds are warm-started and refine the assignment again, so inside the
  /// fit each QP stops on the decrease test alone.
  AssignmentConfig assignment{1e-9, std::numeric_limits<double>::infinity(), 20000, 1e-12};
  std::optional<Matrix> initial_centroids;
};

struct LapKmodesResult {
  SoftAssignment assignment;
  Matrix centroids;
  double sigma = 0.0;   ///< final bandwidth
  std::vector<double> objective;  ///< after every round, all stages
  int rounds = 0;
  std::vector<std::string> log;
};

/// Laplacian K-modes down the homotopy schedule, ending at `sigma`. The
/// K-means stage minimizes lambda tr(Z^T L Z) + (1/2 N s0^2) sum z_nk ||x_n - c_k||^2
/// with s0 the first finite bandwidth, centroids being weighted means.
/// Later stages alternate the assignment QP with weighted mean-shift on
/// every centroid (weights z_nk).
LapKmodesResult lap_kmodes_fit(const DataSet& data, int k, double sigma, double lambda, const AffinityGraph& graph,
                               const HomotopySchedule& schedule, const LapKmodesConfig& cfg);

/// Affinities of a new point to training points: (index, weight) pairs.
using AffinityFn = std::function<std::vector<std::pair<Eigen::Index, double>>(const VectorCRef&)>;

/// Gaussian weights to the k nearest training points.
AffinityFn knn_affinity(const DataSet& train, int k, double sigma);

struct OutOfSampleSoft {
  Vector z;
  bool centroid_only = false;  ///< no affinity to any training point
};

/// z(x) = simplex projection of (zbar + g) / 2, with zbar the affinity-weighted
/// mean of the neighbours' assignments and g_k = G_k / sum_j G_j the
/// normalized centroid similarities. Without neighbours z = g.
OutOfSampleSoft lap_kmodes_out_of_sample(const VectorCRef& x, const LapKmodesResult& model, const AffinityFn& affinity);

}  // namespace modeseek
