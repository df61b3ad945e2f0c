#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "modeseek/components.hpp"
#include "modeseek/types.hpp"

namespace modeseek {

/// One point per row, comma-separated. Blank lines and lines starting with
/// '#' are skipped. All rows must have the same number of fields.
/// Returns D x N.
DataSet read_csv(std::istream& in);
DataSet read_csv(const std::string& path);

/// Writes each column as a row. Values use the shortest round-trip form.
void write_csv(std::ostream& out, const MatrixCRef& points);
void write_csv(const std::string& path, const MatrixCRef& points);

/// One integer per row.
void write_labels(std::ostream& out, const Labels& labels);
void write_labels(const std::string& path, const Labels& labels);

/// Grayscale raster, row-major.
struct GrayImage {
  int height = 0;
  int width = 0;
  int maxval = 255;
  std::vector<std::uint16_t> pixels;

  std::uint16_t at(int i, int j) const { return pixels[static_cast<std::size_t>(i) * width + j]; }
  void validate() const;
};

/// Binary P5 (8 or 16 bit, big-endian) or ASCII P2.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::string& path);

/// ASCII P2.
void write_pgm(std::ostream& out, const GrayImage& image);
void write_pgm(const std::string& path, const GrayImage& image);

}  // namespace modeseek
