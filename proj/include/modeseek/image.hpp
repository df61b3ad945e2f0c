#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modeseek/blur.hpp"
#include "modeseek/io.hpp"
#include "modeseek/mode_seek.hpp"

namespace modeseek {

/// Pixel features (i, j, I) with i the row, j the column and I the intensity
/// rescaled to [0, range_scale]. Without spatial features only I is kept.
struct ImageFeatureSpec {
  double range_scale = 100.0;
  bool include_spatial = true;

  void validate() const;
};

/// One column per pixel in row-major order: pixel (i, j) is column i * W + j.
DataSet image_to_features(const GrayImage& image, const ImageFeatureSpec& spec);

/// Subpixel discretization of the image plane used by ms_discretized.
struct CellCacheConfig {
  int cells_per_pixel = 2;
  bool enabled = true;

  void validate() const;
};

struct DiscretizedStats {
  long cache_hits = 0;
  std::size_t cells = 0;  ///< cells marked at the end of the run
};

struct DiscretizedClustering {
  MsClustering result;
  DiscretizedStats stats;
};

/// Mean-shift from every pixel in raster order. Before each iteration the
/// cell under the iterate's (i, j) projection is looked up; a marked cell ends
/// the run with the end point of the run that marked it. Cells visited by a
/// run are marked once the run ends. Features must start with (i, j).
/// With the cache disabled this is ms_cluster with raster-order merging.
DiscretizedClustering ms_discretized(const KdeModel& model, const CellCacheConfig& cache, const MsConfig& cfg);

enum class SegmentMethod { Ms, MsDiscretized, Bms, BmsAccelerated };

/// "ms", "ms-disc", "bms", "bms-accel". Throws InputError otherwise.
SegmentMethod parse_segment_method(std::string_view name);
std::string_view to_string(SegmentMethod m);

struct SegmentConfig {
  ImageFeatureSpec features;
  double merge_eps = 0.5;  ///< feature units (pixels)
  MsConfig ms;             ///< merge_eps here is ignored
  BmsConfig bms;           ///< merge_eps here is ignored
  CellCacheConfig cache;
};

struct LabelImage {
  int height = 0;
  int width = 0;
  Labels labels;  ///< row-major
  Matrix modes;   ///< feature-space coordinates, one column per label

  int count() const { return static_cast<int>(modes.cols()); }
  int at(int i, int j) const { return labels[static_cast<std::size_t>(i) * width + j]; }

  /// P2 raster of the labels, maxval max(K - 1, 1).
  GrayImage to_image() const;
};

struct Segmentation {
  LabelImage image;
  std::vector<int> iterations;  ///< per pixel; the shared iteration count for BMS
  double seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Gaussian segmentation with bandwidth sigma in feature units.
Segmentation segment_image(const GrayImage& image, double sigma, SegmentMethod method, const SegmentConfig& cfg);

}  // namespace modeseek
