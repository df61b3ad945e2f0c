#include <doctest.h>

#include <random>

#include "modeseek/components.hpp"
#include "modeseek/error.hpp"
#include "support/oracles.hpp"

using namespace modeseek;

TEST_CASE("within_distance is a strict ball test") {
  const Vector a = Vector::Zero(3);
  const Vector b = (Vector(3) << 3, 4, 0).finished();
  CHECK(within_distance(a, b, 5.0001));
  CHECK_FALSE(within_distance(a, b, 5.0));
  CHECK_FALSE(within_distance(a, b, 1.0));
}

TEST_CASE("cc_naive chains through neighbours") {
  Matrix p(1, 6);
  p << 0, 0.9, 1.8, 10, 10.5, 30;
  const CcResult r = cc_naive(p, 1.0);
  CHECK(r.count() == 3);
  CHECK(r.labels == Labels{0, 0, 0, 1, 1, 2});
  CHECK(r.members0 == std::vector<Eigen::Index>{0, 3, 5});
  CHECK(r.representatives(0, 1) == 10.0);
}

TEST_CASE("cc_tight depends on order when clusters are not tight") {
  Matrix p(1, 3);
  p << 0, 1.8, 0.9;
  CHECK(cc_naive(p, 1.0).count() == 1);
  CHECK(cc_tight(p, 1.0).count() == 2);
}

TEST_CASE("cc_tight matches cc_naive on tight clusters") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const double eps = 0.3;
    std::uniform_int_distribution<int> kd(1, 8);
    const int k = kd(rng);
    Matrix centers(2, k);
    for (int i = 0; i < k; ++i) centers.col(i) << 3.5 * eps * i, 0.0;
    std::vector<int> truth;
    Matrix pts(2, 0);
    std::uniform_real_distribution<double> u(-eps / 9, eps / 9);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < 10; ++j) {
        pts.conservativeResize(2, pts.cols() + 1);
        pts.col(pts.cols() - 1) = centers.col(i) + Eigen::Vector2d(u(rng), u(rng));
        truth.push_back(i);
      }
    const CcResult a = cc_naive(pts, eps), b = cc_tight(pts, eps), c = cc_tight(pts, eps, true);
    CHECK(a.count() == k);
    CHECK(a.labels == b.labels);
    CHECK(a.labels == c.labels);
  }
}

TEST_CASE("metric overloads") {
  Matrix p(2, 4);
  p << 0, 0.5, 3, 3.4, 0, 0.5, 0, 0;
  const Metric linf = [](const VectorCRef& a, const VectorCRef& b) { return (a - b).cwiseAbs().maxCoeff(); };
  CHECK(cc_naive(p, 0.6, linf).labels == Labels{0, 0, 1, 1});
  CHECK(cc_tight(p, 0.6, linf).labels == Labels{0, 0, 1, 1});
  // Euclidean distance of the first pair is 0.707 > 0.6.
  CHECK(cc_naive(p, 0.6).count() == 3);
}

TEST_CASE("invalid eps") {
  Matrix p = Matrix::Zero(2, 3);
  CHECK_THROWS_AS(cc_naive(p, 0.0), InputError);
  CHECK_THROWS_AS(cc_tight(p, -1.0), InputError);
  CHECK(cc_tight(p, 1e-9).count() == 1);
}
