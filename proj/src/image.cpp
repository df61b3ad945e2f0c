#include "modeseek/image.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "detail.hpp"
#include "modeseek/error.hpp"

namespace modeseek {
namespace {

std::uint64_t cell_key(const Vector& x, int g) {
  const auto a = static_cast<std::int64_t>(std::floor(x[0] * g));
  const auto b = static_cast<std::int64_t>(std::floor(x[1] * g));
  return (static_cast<std::uint64_t>(a) << 32) ^ (static_cast<std::uint64_t>(b) & 0xffffffffULL);
}

}  // namespace

void ImageFeatureSpec::validate() const {
  if (!(range_scale > 0.0) || !std::isfinite(range_scale)) throw InputError("range scale must be positive");
}

DataSet image_to_features(const GrayImage& image, const ImageFeatureSpec& spec) {
  image.validate();
  spec.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(image.height) * image.width;
  const Eigen::Index d = spec.include_spatial ? 3 : 1;
  DataSet out(d, n);
  const double scale = spec.range_scale / image.maxval;
  for (int i = 0; i < image.height; ++i) {
    for (int j = 0; j < image.width; ++j) {
      const Eigen::Index col = static_cast<Eigen::Index>(i) * image.width + j;
      if (spec.include_spatial) {
        out(0, col) = i;
        out(1, col) = j;
      }
      out(d - 1, col) = image.at(i, j) * scale;
    }
  }
  return out;
}

void CellCacheConfig::validate() const {
  if (cells_per_pixel < 1) throw InputError("cells per pixel must be at least 1");
}

DiscretizedClustering ms_discretized(const KdeModel& model, const CellCacheConfig& cache, const MsConfig& cfg) {
  cache.validate();
  if (model.dim() < 2) throw InputError("discretized mean-shift needs spatial features in the first two rows");
  const Eigen::Index n = model.size();
  const double eps = resolve_merge_eps(cfg, model);
  const bool exact = !model.kernel().is_gaussian();
  const int g = cache.cells_per_pixel;

  DiscretizedClustering out;
  MsClustering& res = out.result;
  res.convergence_points = model.data();
  auto& diag = res.diagnostics;
  diag.iterations.assign(static_cast<std::size_t>(n), 0);
  diag.status.assign(static_cast<std::size_t>(n), ModeStatus::MaxIter);

  // Cell -> pixel whose run marked it. That pixel's end point is final.
  std::unordered_map<std::uint64_t, Eigen::Index> cells;
  std::vector<std::uint64_t> visited;
  for (Eigen::Index p = 0; p < n; ++p) {
    visited.clear();
    Vector x = model.data().col(p);
    Eigen::Index source = p;
    int it = 0;
    bool failed = false;
    ModeStatus status = ModeStatus::MaxIter;
    try {
      while (true) {
        if (cache.enabled) {
          const std::uint64_t key = cell_key(x, g);
          if (auto hit = cells.find(key); hit != cells.end()) {
            source = hit->second;
            ++out.stats.cache_hits;
            break;
          }
          visited.push_back(key);
        }
        if (it == cfg.max_iter) break;
        Vector y = ms_step(model, x);
        const double step = (y - x).norm();
        ++it;
        const bool done = exact ? step == 0.0 : detail::small_step(step, y, cfg.tol);
        x = std::move(y);
        if (done) {
          status = detail::classify_end_point(model, x);
          break;
        }
      }
    } catch (const NumericalError&) {
      failed = true;
    }
    const auto slot = static_cast<std::size_t>(p);
    diag.iterations[slot] = it;
    if (failed) {
      diag.failed_points.push_back(p);
      continue;
    }
    if (source != p) {
      res.convergence_points.col(p) = res.convergence_points.col(source);
      diag.status[slot] = diag.status[static_cast<std::size_t>(source)];
    } else {
      res.convergence_points.col(p) = x;
      diag.status[slot] = status;
    }
    for (std::uint64_t key : visited) cells.emplace(key, source);
  }
  out.stats.cells = cells.size();
  if (!diag.failed_points.empty())
    diag.warnings.push_back(std::to_string(diag.failed_points.size()) +
                            " point(s) had no neighbors in the kernel window and form singleton clusters");
  res.clustering = detail::merge_end_points(model.data(), res.convergence_points, diag.failed_points, eps, true);
  return out;
}

SegmentMethod parse_segment_method(std::string_view name) {
  if (name == "ms") return SegmentMethod::Ms;
  if (name == "ms-disc") return SegmentMethod::MsDiscretized;
  if (name == "bms") return SegmentMethod::Bms;
  if (name == "bms-accel") return SegmentMethod::BmsAccelerated;
  throw InputError("unknown segmentation method '" + std::string(name) + "'");
}

std::string_view to_string(SegmentMethod m) {
  switch (m) {
    case SegmentMethod::Ms: return "ms";
    case SegmentMethod::MsDiscretized: return "ms-disc";
    case SegmentMethod::Bms: return "bms";
    case SegmentMethod::BmsAccelerated: return "bms-accel";
  }
  return "?";
}

GrayImage LabelImage::to_image() const {
  if (count() > 65536) throw InputError("too many labels for a PGM label image");
  GrayImage img;
  img.height = height;
  img.width = width;
  img.maxval = std::max(count() - 1, 1);
  img.pixels.reserve(labels.size());
  for (int l : labels) img.pixels.push_back(static_cast<std::uint16_t>(l));
  img.validate();
  return img;
}

Segmentation segment_image(const GrayImage& image, double sigma, SegmentMethod method, const SegmentConfig& cfg) {
  if (!(cfg.merge_eps > 0.0)) throw InputError("merge threshold must be positive");
  if (!cfg.features.include_spatial && method == SegmentMethod::MsDiscretized)
    throw InputError("ms-disc needs spatial features");
  const auto t0 = std::chrono::steady_clock::now();
  const DataSet features = image_to_features(image, cfg.features);

  Segmentation seg;
  seg.image.height = image.height;
  seg.image.width = image.width;
  Clustering clustering;
  if (method == SegmentMethod::Ms || method == SegmentMethod::MsDiscretized) {
    MsConfig ms = cfg.ms;
    ms.merge_eps = cfg.merge_eps;
    const KdeModel model(features, Kernel::gaussian(), Bandwidth::scalar(sigma));
    MsClustering r = method == SegmentMethod::Ms ? ms_cluster(model, ms) : ms_discretized(model, cfg.cache, ms).result;
    clustering = std::move(r.clustering);
    seg.iterations = std::move(r.diagnostics.iterations);
    seg.warnings = std::move(r.diagnostics.warnings);
  } else {
    BmsConfig bms = cfg.bms;
    bms.merge_eps = cfg.merge_eps;
    BmsResult r = method == SegmentMethod::Bms ? bms_cluster(features, sigma, bms)
                                               : bms_cluster_accelerated(features, sigma, bms);
    clustering = std::move(r.clustering);
    seg.iterations.assign(static_cast<std::size_t>(features.cols()), r.iterations);
    seg.warnings = std::move(r.warnings);
  }
  seg.image.labels = std::move(clustering.labels);
  seg.image.modes = std::move(clustering.centers);
  seg.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return seg;
}

}  // namespace modeseek
