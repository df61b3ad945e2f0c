#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modeseek/blur.hpp"
#include "modeseek/error.hpp"
#include "modeseek/image.hpp"
#include "modeseek/io.hpp"
#include "modeseek/kmodes.hpp"
#include "modeseek/manifold.hpp"
#include "modeseek/mode_seek.hpp"

using namespace modeseek;

namespace {

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void note(const std::vector<std::string>& lines) {
  for (const auto& l : lines) std::cerr << "note: " << l << '\n';
}

/// "a:b:n" -> n values evenly spaced from a to b.
std::vector<double> parse_grid(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw InputError("sigma grid must look like a:b:n");
  double a = 0.0, b = 0.0;
  long n = 0;
  try {
    std::size_t used = 0;
    a = std::stod(spec.substr(0, c1), &used);
    if (used != c1) throw std::invalid_argument("a");
    b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1), &used);
    if (used != c2 - c1 - 1) throw std::invalid_argument("b");
    n = std::stol(spec.substr(c2 + 1), &used);
    if (used != spec.size() - c2 - 1) throw std::invalid_argument("n");
  } catch (const std::logic_error&) {
    throw InputError("sigma grid must look like a:b:n");
  }
  if (n < 1 || (n == 1 && a != b)) throw InputError("sigma grid needs n >= 1 (n = 1 only when a = b)");
  std::vector<double> grid;
  for (long i = 0; i < n; ++i) grid.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return grid;
}

struct ClusterOpts {
  std::string input, output, modes, kernel = "gaussian", method = "ms";
  std::optional<double> bandwidth, perplexity, tol;
  double merge_eps = 0.0;
};

void run_cluster(const ClusterOpts& o) {
  const DataSet data = read_csv(o.input);
  const Kernel kernel = parse_kernel(o.kernel);
  if (o.perplexity && o.bandwidth) throw InputError("give either --bandwidth or --adaptive-perplexity, not both");
  if (!o.perplexity && !o.bandwidth) throw InputError("--bandwidth is required");
  Clustering c;
  if (o.method == "ms") {
    if (o.perplexity && !kernel.is_gaussian()) throw InputError("adaptive bandwidths need the Gaussian kernel");
    Bandwidth bw = o.perplexity ? entropic_bandwidths(data, *o.perplexity) : Bandwidth::scalar(*o.bandwidth);
    MsConfig cfg;
    if (o.tol) cfg.tol = *o.tol;
    cfg.merge_eps = o.merge_eps;
    MsClustering r = ms_cluster(KdeModel(data, kernel, std::move(bw)), cfg);
    warn(r.diagnostics.warnings);
    c = std::move(r.clustering);
  } else if (o.method == "bms" || o.method == "bms-accel") {
    if (!kernel.is_gaussian()) throw InputError("blurring mean-shift uses the Gaussian kernel");
    if (o.perplexity) throw InputError("blurring mean-shift takes a single --bandwidth");
    BmsConfig cfg;
    if (o.tol) cfg.entropy_tol = *o.tol;
    cfg.merge_eps = o.merge_eps;
    BmsResult r = o.method == "bms" ? bms_cluster(data, *o.bandwidth, cfg) : bms_cluster_accelerated(data, *o.bandwidth, cfg);
    warn(r.warnings);
    c = std::move(r.clustering);
  } else {
    throw InputError("unknown method '" + o.method + "'");
  }
  write_labels(o.output, c.labels);
  if (!o.modes.empty()) write_csv(o.modes, c.centers);
}

struct SegmentOpts {
  std::string image, output, report, method = "ms";
  double bandwidth = 0.0, range_scale = 100.0, merge_eps = 0.5;
};

void run_segment(const SegmentOpts& o) {
  const GrayImage image = read_pgm(o.image);
  const SegmentMethod method = parse_segment_method(o.method);
  SegmentConfig cfg;
  cfg.features.range_scale = o.range_scale;
  cfg.merge_eps = o.merge_eps;
  const Segmentation seg = segment_image(image, o.bandwidth, method, cfg);
  warn(seg.warnings);
  write_pgm(o.output, seg.image.to_image());
  if (o.report.empty()) return;

  std::map<int, long> histogram;
  double total = 0.0;
  for (int it : seg.iterations) {
    ++histogram[it];
    total += it;
  }
  nlohmann::json hist = nlohmann::json::object();
  for (auto [it, count] : histogram) hist[std::to_string(it)] = count;
  nlohmann::json report = {
      {"method", std::string(to_string(method))},
      {"bandwidth", o.bandwidth},
      {"height", image.height},
      {"width", image.width},
      {"clusters", seg.image.count()},
      {"runtime_seconds", seg.seconds},
      {"mean_iterations", seg.iterations.empty() ? 0.0 : total / static_cast<double>(seg.iterations.size())},
      {"iterations_histogram", hist},
      {"warnings", seg.warnings},
  };
  std::ofstream out(o.report);
  if (!out) throw InputError("cannot write " + o.report);
  out << report.dump(2) << '\n';
}

struct DenoiseOpts {
  std::string input, output;
  double bandwidth = 0.0, stop_ratio = 0.01;
  int knn = 10, tangent_dim = 1, max_iter = 5;
};

void run_denoise(const DenoiseOpts& o) {
  const DataSet data = read_csv(o.input);
  MbmsConfig cfg;
  cfg.sigma = o.bandwidth;
  cfg.k = o.knn;
  cfg.L = o.tangent_dim;
  cfg.max_iter = o.max_iter;
  cfg.stop_ratio = o.stop_ratio;
  const MbmsResult r = mbms_run(data, cfg);
  if (r.degenerate_tangents > 0)
    warn({std::to_string(r.degenerate_tangents) + " neighbourhood(s) had rank below the tangent dimension"});
  write_csv(o.output, r.data);
}

struct KmodesOpts {
  std::string input, output, centers, soft;
  int k = 0, graph_knn = 10;
  double bandwidth = 0.0, lambda = 0.0;
  std::optional<double> graph_sigma;
};

void run_kmodes(const KmodesOpts& o) {
  const DataSet data = read_csv(o.input);
  const HomotopySchedule schedule = HomotopySchedule::standard(data, o.bandwidth);
  Labels labels;
  Matrix centroids, soft;
  if (o.lambda > 0.0) {
    const AffinityGraph graph = knn_graph(data, o.graph_knn, o.graph_sigma.value_or(o.bandwidth));
    LapKmodesResult r = lap_kmodes_fit(data, o.k, o.bandwidth, o.lambda, graph, schedule, {});
    note(r.log);
    labels = r.assignment.argmax();
    centroids = std::move(r.centroids);
    soft = std::move(r.assignment.z);
  } else {
    if (o.lambda < 0.0) throw InputError("--lambda must be nonnegative");
    KmodesResult r = kmodes_fit(data, o.k, schedule, {});
    note(r.log);
    labels = r.assignment.labels();
    centroids = std::move(r.centroids);
    soft = r.assignment.matrix();
  }
  write_labels(o.output, labels);
  write_csv(o.centers, centroids);
  if (!o.soft.empty()) write_csv(o.soft, soft.transpose());
}

struct CondOpts {
  std::string input, query, output;
  long xdim = 1;
  double bandwidth = 0.0;
};

/// Rows: query index, weight, y coordinates; modes of a query by decreasing weight.
void run_condmodes(const CondOpts& o) {
  const DataSet pairs = read_csv(o.input);
  const DataSet queries = read_csv(o.query);
  if (queries.rows() != o.xdim) throw InputError("query rows must have --xdim values");
  const Eigen::Index ydim = pairs.rows() - o.xdim;
  std::vector<Vector> rows;
  for (Eigen::Index q = 0; q < queries.cols(); ++q) {
    for (const ConditionalMode& m : conditional_modes(pairs, o.xdim, o.bandwidth, queries.col(q), {})) {
      Vector row(2 + ydim);
      row << static_cast<double>(q), m.weight, m.y;
      rows.push_back(std::move(row));
    }
  }
  Matrix out(2 + std::max<Eigen::Index>(ydim, 0), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = rows[i];
  write_csv(o.output, out);
}

struct TreeOpts {
  std::string input, grid, output;
};

/// Rows: level, sigma, mode index, index of the mode it becomes at the next
/// level (-1 if it vanishes or at the last level), coordinates.
void run_modetree(const TreeOpts& o) {
  const DataSet data = read_csv(o.input);
  const std::vector<ScaleLevel> levels = mode_continuation(data, parse_grid(o.grid), {});
  std::vector<Vector> rows;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (Eigen::Index m = 0; m < levels[l].modes.cols(); ++m) {
      const int next = l + 1 < levels.size() ? levels[l + 1].from_previous[static_cast<std::size_t>(m)] : -1;
      Vector row(4 + data.rows());
      row << static_cast<double>(l), levels[l].sigma, static_cast<double>(m), static_cast<double>(next),
          levels[l].modes.col(m);
      rows.push_back(std::move(row));
    }
  }
  Matrix out(4 + data.rows(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = rows[i];
  write_csv(o.output, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mode-seeking clustering, segmentation and denoising"};
  app.require_subcommand(1);

  ClusterOpts co;
  auto* cluster = app.add_subcommand("cluster", "Mean-shift or blurring mean-shift clustering of a CSV dataset");
  cluster->add_option("--input", co.input, "Points, one per row")->required();
  cluster->add_option("--kernel", co.kernel, "gaussian or epanechnikov")->capture_default_str();
  cluster->add_option("--bandwidth", co.bandwidth, "Kernel bandwidth");
  cluster->add_option("--adaptive-perplexity", co.perplexity, "Per-point bandwidths with this perplexity");
  cluster->add_option("--method", co.method, "ms, bms or bms-accel")->capture_default_str();
  cluster->add_option("--tol", co.tol, "Step tolerance (ms) or entropy tolerance (bms)");
  cluster->add_option("--merge-eps", co.merge_eps, "Merge threshold; 0 means bandwidth / 100")->capture_default_str();
  cluster->add_option("--output", co.output, "Labels CSV")->required();
  cluster->add_option("--modes", co.modes, "Cluster centers CSV");

  SegmentOpts so;
  auto* segment = app.add_subcommand("segment", "Segment a grayscale PGM image");
  segment->add_option("--image", so.image, "P2 or P5 PGM")->required();
  segment->add_option("--bandwidth", so.bandwidth, "Bandwidth in pixels")->required();
  segment->add_option("--method", so.method, "ms, ms-disc, bms or bms-accel")->capture_default_str();
  segment->add_option("--range-scale", so.range_scale, "Intensity range after rescaling")->capture_default_str();
  segment->add_option("--merge-eps", so.merge_eps, "Merge threshold in pixels")->capture_default_str();
  segment->add_option("--output", so.output, "Label image (P2)")->required();
  segment->add_option("--report", so.report, "JSON run report");

  DenoiseOpts dn;
  auto* denoise = app.add_subcommand("denoise", "Manifold blurring mean-shift");
  denoise->add_option("--input", dn.input, "Points, one per row")->required();
  denoise->add_option("--bandwidth", dn.bandwidth, "Kernel bandwidth")->required();
  denoise->add_option("--knn", dn.knn, "Neighbours for local PCA")->capture_default_str();
  denoise->add_option("--tangent-dim", dn.tangent_dim, "Manifold dimension")->capture_default_str();
  denoise->add_option("--max-iter", dn.max_iter, "Iterations")->capture_default_str();
  denoise->add_option("--stop-ratio", dn.stop_ratio, "Stop when the mean normal/tangent ratio falls below this")
      ->capture_default_str();
  denoise->add_option("--output", dn.output, "Denoised points CSV")->required();

  KmodesOpts ko;
  auto* kmodes = app.add_subcommand("kmodes", "K-modes, or Laplacian K-modes with --lambda");
  kmodes->add_option("--input", ko.input, "Points, one per row")->required();
  kmodes->add_option("--k", ko.k, "Number of clusters")->required();
  kmodes->add_option("--bandwidth", ko.bandwidth, "Final bandwidth")->required();
  kmodes->add_option("--lambda", ko.lambda, "Laplacian weight; 0 runs plain K-modes")->capture_default_str();
  kmodes->add_option("--graph-knn", ko.graph_knn, "Neighbours in the affinity graph")->capture_default_str();
  kmodes->add_option("--graph-sigma", ko.graph_sigma, "Affinity graph bandwidth (default: --bandwidth)");
  kmodes->add_option("--output", ko.output, "Labels CSV")->required();
  kmodes->add_option("--centers", ko.centers, "Centroids CSV")->required();
  kmodes->add_option("--soft", ko.soft, "Assignment matrix CSV");

  CondOpts cm;
  auto* condmodes = app.add_subcommand("condmodes", "Modes of p(y|x) from a joint sample");
  condmodes->add_option("--input", cm.input, "Rows (x, y)")->required();
  condmodes->add_option("--xdim", cm.xdim, "Leading columns that form x")->required();
  condmodes->add_option("--bandwidth", cm.bandwidth, "Kernel bandwidth")->required();
  condmodes->add_option("--query", cm.query, "x values, one per row")->required();
  condmodes->add_option("--output", cm.output, "Rows: query, weight, y")->required();

  TreeOpts to;
  auto* modetree = app.add_subcommand("modetree", "Track modes over a bandwidth grid");
  modetree->add_option("--input", to.input, "Points, one per row")->required();
  modetree->add_option("--sigma-grid", to.grid, "a:b:n, n bandwidths evenly spaced from a to b")->required();
  modetree->add_option("--output", to.output, "Rows: level, sigma, mode, next mode, coordinates")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*cluster) run_cluster(co);
    if (*segment) run_segment(so);
    if (*denoise) run_denoise(dn);
    if (*kmodes) run_kmodes(ko);
    if (*condmodes) run_condmodes(cm);
    if (*modetree) run_modetree(to);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
