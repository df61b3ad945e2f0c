#include <doctest.h>

#include <cmath>
#include <random>

#include "modeseek/blur.hpp"
#include "modeseek/error.hpp"
#include "modeseek/manifold.hpp"
#include "support/oracles.hpp"

using namespace modeseek;

namespace {

/// Evenly spaced points on the x-axis.
DataSet axis_points(int n, double spacing) {
  DataSet x = Matrix::Zero(2, n);
  for (int i = 0; i < n; ++i) x(0, i) = (i - (n - 1) / 2.0) * spacing;
  return x;
}

MbmsConfig config(double sigma, int k, int l) {
  MbmsConfig c;
  c.sigma = sigma;
  c.k = k;
  c.L = l;
  return c;
}

}  // namespace

TEST_CASE("tangent of a line") {
  const DataSet x = axis_points(20, 0.3);
  const TangentSpace t = local_tangent(x, 4, 5, 1);
  REQUIRE(t.basis.cols() == 1);
  CHECK(std::abs(t.basis(0, 0)) > 1 - 1e-8);
  CHECK((t.basis.transpose() * t.basis - Matrix::Identity(1, 1)).norm() < 1e-10);
  CHECK_FALSE(t.degenerate);
  CHECK(normal_to_tangent_ratio(t) < 1e-20);

  const TangentSpace none = local_tangent(x, 4, 5, 0);
  CHECK(none.basis.cols() == 0);
  CHECK(std::isinf(normal_to_tangent_ratio(none)));
}

TEST_CASE("tangent of a circle is perpendicular to the radius") {
  DataSet x(2, 90);
  for (int i = 0; i < 90; ++i) x.col(i) << std::cos(i * M_PI / 45), std::sin(i * M_PI / 45);
  for (Eigen::Index n = 0; n < 90; n += 9) {
    const TangentSpace t = local_tangent(x, n, 6, 1);
    const double c = std::abs(t.basis.col(0).dot(x.col(n)));
    CHECK(c < std::sin(5 * M_PI / 180));
  }
}

TEST_CASE("degenerate neighbourhoods are flagged") {
  const DataSet x = Matrix::Zero(3, 6);
  const TangentSpace t = local_tangent(x, 0, 3, 2);
  CHECK(t.degenerate);
  CHECK(t.basis.cols() == 2);
  CHECK((t.basis.transpose() * t.basis - Matrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("configuration checks") {
  const DataSet x = axis_points(5, 1);
  CHECK_THROWS_AS(mbms_step(x, config(1, 2, 2)), InputError);
  CHECK_THROWS_AS(mbms_step(x, config(1, 5, 1)), InputError);
  CHECK_THROWS_AS(mbms_step(x, config(0, 2, 1)), InputError);
  CHECK_THROWS_AS(mbms_step(x, config(1, 0, 0)), InputError);
  CHECK_THROWS_AS(local_tangent(x, 7, 2, 1), InputError);
}

TEST_CASE("L = 0 is one blurring step") {
  std::mt19937_64 rng(3);
  const DataSet x = oracle::uniform(2, 50, 0, 1, rng);
  const DataSet a = mbms_step(x, config(0.2, 4, 0));
  const WeightedDataSet b = bms_step(WeightedDataSet::uniform(x), 0.2, FilterSpec::standard());
  CHECK((a - b.points).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("an off-line point moves straight towards the line") {
  DataSet x(2, 22);
  x.leftCols(21) = axis_points(21, 0.2);
  x.col(21) << 0, 0.5;
  const DataSet y = mbms_step(x, config(0.5, 5, 1));
  CHECK(std::abs(y(0, 21)) < 1e-6);
  CHECK(std::abs(y(1, 21)) < 0.5);
}

TEST_CASE("clean line data does not move") {
  const DataSet x = axis_points(30, 0.1);
  const MbmsResult r = [&] {
    MbmsConfig c = config(0.3, 5, 1);
    c.stop_ratio = -0.0;
    c.max_iter = 3;
    return mbms_run(x, c);
  }();
  CHECK((r.data - x).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("noisy line: normal spread shrinks, tangential spread kept") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 0.05);
  DataSet x = axis_points(200, 0.05);
  for (Eigen::Index n = 0; n < x.cols(); ++n) x(1, n) += z(rng);
  MbmsConfig c = config(0.15, 10, 1);
  DataSet d = x;
  for (int step = 0; step < 2; ++step) {
    const DataSet next = mbms_step(d, c);
    for (Eigen::Index n = 0; n < d.cols(); ++n) {
      const TangentSpace t = local_tangent(d, n, c.k, c.L);
      CHECK((t.basis.transpose() * (next.col(n) - d.col(n))).cwiseAbs().maxCoeff() < 1e-10);
    }
    auto spread = [](const Eigen::RowVectorXd& v) { return std::sqrt((v.array() - v.mean()).square().mean()); };
    // Only interior points: the ends of a finite line are pulled inwards.
    const double before = spread(d.row(0).segment(20, 160)), after = spread(next.row(0).segment(20, 160));
    CHECK(std::abs(after / before - 1.0) < 0.01);
    CHECK(spread(next.row(1)) < spread(d.row(1)));
    d = next;
  }
}

TEST_CASE("run stops early or at max_iter") {
  const DataSet x = axis_points(30, 0.1);
  MbmsConfig c = config(0.3, 5, 1);
  c.max_iter = 0;
  CHECK(mbms_run(x, c).data == x);
  c.max_iter = 4;
  const MbmsResult r = mbms_run(x, c);
  CHECK(r.stopped_by_ratio);
  CHECK(r.iterations == 0);
}
