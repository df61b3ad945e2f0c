#include "modeseek/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "modeseek/error.hpp"

namespace modeseek {
namespace {

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::out | std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || end != field.data() + field.size())
    throw InputError("line " + std::to_string(line) + ": not a number: '" + std::string(field) + "'");
  return v;
}

/// Next whitespace-delimited PGM header token, skipping '#' comments.
int header_int(std::istream& in) {
  int c = in.get();
  while (in) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (!in || !std::isdigit(c)) throw InputError("malformed PGM header");
  long v = 0;
  while (in && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1 << 30) throw InputError("PGM header value too large");
    c = in.get();
  }
  // The single whitespace after the last header field is consumed here.
  return static_cast<int>(v);
}

}  // namespace

DataSet read_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    std::size_t fields = 0;
    while (true) {
      const auto comma = s.find(',');
      values.push_back(parse_double(s.substr(0, comma), lineno));
      ++fields;
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
    if (rows == 0)
      dim = fields;
    else if (fields != dim)
      throw InputError("line " + std::to_string(lineno) + ": expected " + std::to_string(dim) + " fields, got " +
                       std::to_string(fields));
    ++rows;
  }
  if (rows == 0) throw InputError("CSV input has no data rows");
  DataSet out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t d = 0; d < dim; ++d)
      out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r)) = values[r * dim + d];
  return out;
}

DataSet read_csv(const std::string& path) {
  auto in = open_in(path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const MatrixCRef& points) {
  char buf[64];
  for (Eigen::Index n = 0; n < points.cols(); ++n) {
    for (Eigen::Index d = 0; d < points.rows(); ++d) {
      if (d) out.put(',');
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, points(d, n));
      out.write(buf, end - buf);
    }
    out.put('\n');
  }
}

void write_csv(const std::string& path, const MatrixCRef& points) {
  auto out = open_out(path);
  write_csv(out, points);
}

void write_labels(std::ostream& out, const Labels& labels) {
  for (int l : labels) out << l << '\n';
}

void write_labels(const std::string& path, const Labels& labels) {
  auto out = open_out(path);
  write_labels(out, labels);
}

void GrayImage::validate() const {
  if (height < 1 || width < 1) throw InputError("image must have at least one pixel");
  if (maxval < 1 || maxval > 65535) throw InputError("PGM maxval must be in [1, 65535]");
  if (pixels.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
    throw InputError("pixel count does not match image size");
  for (auto p : pixels)
    if (p > maxval) throw InputError("pixel value exceeds maxval");
}

GrayImage read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '2')) throw InputError("not a P2/P5 PGM file");
  GrayImage img;
  img.width = header_int(in);
  img.height = header_int(in);
  img.maxval = header_int(in);
  if (img.height < 1 || img.width < 1) throw InputError("PGM image is empty");
  if (img.maxval < 1 || img.maxval > 65535) throw InputError("PGM maxval must be in [1, 65535]");
  const std::size_t count = static_cast<std::size_t>(img.height) * static_cast<std::size_t>(img.width);
  img.pixels.resize(count);
  if (magic[1] == '5') {
    const std::size_t bytes = img.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw InputError("PGM pixel data is truncated");
    for (std::size_t i = 0; i < count; ++i)
      img.pixels[i] = bytes == 1 ? raw[i] : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      long v = -1;
      if (!(in >> v)) throw InputError("PGM pixel data is truncated");
      if (v < 0 || v > img.maxval) throw InputError("pixel value exceeds maxval");
      img.pixels[i] = static_cast<std::uint16_t>(v);
    }
  }
  img.validate();
  return img;
}

GrayImage read_pgm(const std::string& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const GrayImage& image) {
  image.validate();
  out << "P2\n" << image.width << ' ' << image.height << '\n' << image.maxval << '\n';
  for (int i = 0; i < image.height; ++i) {
    for (int j = 0; j < image.width; ++j) {
      if (j) out.put(' ');
      out << image.at(i, j);
    }
    out.put('\n');
  }
}

void write_pgm(const std::string& path, const GrayImage& image) {
  auto out = open_out(path);
  write_pgm(out, image);
}

}  // namespace modeseek
