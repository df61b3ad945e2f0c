#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "modeseek/error.hpp"
#include "modeseek/kde.hpp"

namespace modeseek {

namespace {

constexpr double kPerplexityTol = 1e-7;
constexpr int kMaxExpansions = 400;
constexpr int kMaxBisections = 300;

void reject_duplicates(const DataSet& data) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index d = 0; d < data.rows(); ++d) {
      if (data(d, a) != data(d, b)) return data(d, a) < data(d, b);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (data.col(order[i - 1]) == data.col(order[i]))
      throw InputError("entropic bandwidths: points " + std::to_string(order[i - 1]) + " and " +
                       std::to_string(order[i]) + " coincide");
  }
}

double perplexity_from_sq_dists(const std::vector<double>& d2, double d2_min, double sigma) {
  const double inv = 0.5 / (sigma * sigma);
  double z = 0.0;
  double weighted = 0.0;
  for (double v : d2) {
    const double e = (v - d2_min) * inv;
    const double w = std::exp(-e);
    z += w;
    weighted += w * e;
  }
  // H = log z + E[e] in nats
  const double entropy = std::log(z) + weighted / z;
  return std::exp(entropy);
}

}  // namespace

double neighbor_perplexity(const DataSet& data, Eigen::Index n, double sigma) {
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index m = 0; m < data.cols(); ++m)
    if (m != n) d2.push_back((data.col(n) - data.col(m)).squaredNorm());
  const double d2_min = *std::min_element(d2.begin(), d2.end());
  return perplexity_from_sq_dists(d2, d2_min, sigma);
}

Bandwidth entropic_bandwidths(const DataSet& data, double perplexity) {
  const Eigen::Index n_points = data.cols();
  if (n_points < 3) throw InputError("entropic bandwidths need at least 3 points");
  const double max_perp = static_cast<double>(n_points - 1);
  if (!(perplexity > 1.0) || perplexity > max_perp)
    throw InputError("perplexity must lie in (1, N-1]");
  reject_duplicates(data);

  Vector sigmas(n_points);
  for (Eigen::Index n = 0; n < n_points; ++n) {
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(n_points - 1));
    for (Eigen::Index m = 0; m < n_points; ++m)
      if (m != n) d2.push_back((data.col(n) - data.col(m)).squaredNorm());
    const double d2_min = *std::min_element(d2.begin(), d2.end());
    std::vector<double> sorted = d2;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double start = std::sqrt(sorted[sorted.size() / 2]);
    auto perp = [&](double s) { return perplexity_from_sq_dists(d2, d2_min, s); };

    double lo = start, hi = start;
    double p_lo = perp(lo), p_hi = p_lo;
    for (int i = 0; p_lo > perplexity && i < kMaxExpansions; ++i) p_lo = perp(lo *= 0.5);
    if (p_lo > perplexity + kPerplexityTol)
      throw NoSolutionError(static_cast<std::size_t>(n),
                            "perplexity stays above target as the bandwidth shrinks "
                            "(equidistant nearest neighbors)");
    for (int i = 0; p_hi < perplexity - kPerplexityTol && i < kMaxExpansions; ++i) p_hi = perp(hi *= 2.0);
    if (p_hi < perplexity - kPerplexityTol)
      throw NoSolutionError(static_cast<std::size_t>(n), "perplexity never reaches target");

    double sigma = std::abs(p_lo - perplexity) <= std::abs(p_hi - perplexity) ? lo : hi;
    double best_err = std::min(std::abs(p_lo - perplexity), std::abs(p_hi - perplexity));
    for (int i = 0; best_err > kPerplexityTol && i < kMaxBisections; ++i) {
      const double mid = std::sqrt(lo * hi);
      const double p_mid = perp(mid);
      if (std::abs(p_mid - perplexity) < best_err) {
        best_err = std::abs(p_mid - perplexity);
        sigma = mid;
      }
      if (p_mid < perplexity) lo = mid; else hi = mid;
      if (hi <= lo * (1.0 + 1e-15)) break;
    }
    if (best_err > kPerplexityTol)
      throw NoSolutionError(static_cast<std::size_t>(n), "bisection did not reach the target perplexity");
    sigmas[n] = sigma;
  }
  return Bandwidth::per_point(std::move(sigmas));
}

}  // namespace modeseek
