#include "modeseek/types.hpp"

#include <algorithm>
#include <cmath>

namespace modeseek {

double diameter(const MatrixCRef& points) {
  double best = 0.0;
  for (Eigen::Index a = 0; a < points.cols(); ++a)
    for (Eigen::Index b = a + 1; b < points.cols(); ++b)
      best = std::max(best, (points.col(a) - points.col(b)).squaredNorm());
  return std::sqrt(best);
}

}  // namespace modeseek
