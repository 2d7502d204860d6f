#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <vector>

#include "wunt/partition.hpp"

using namespace wunt;

namespace {

Eigen::MatrixXd random_unit_points(std::mt19937_64& gen, Eigen::Index n,
                                   Eigen::Index d)
{
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd pts(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      pts(i, k) = unif(gen);
    }
  }
  return pts;
}

} // namespace

TEST_CASE("smoothing kernel satisfies the required shape conditions")
{
  CHECK(SmoothingKernel::density(-0.5) == 0.0);
  CHECK(SmoothingKernel::density(0.5) == 0.0);
  CHECK(SmoothingKernel::cdf(-0.5) == 0.0);
  CHECK(SmoothingKernel::cdf(0.5) == 1.0);
  CHECK(SmoothingKernel::cdf(0.0) == 0.5);
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double u = -0.5 + i / 1000.0;
    if (i > 0 && i < 1000) {
      CHECK(SmoothingKernel::density(u) > 0.0);
    }
    const double c = SmoothingKernel::cdf(u);
    CHECK(c > prev);
    prev = c;
    // T' = S by construction; spot-check by central differences
    if (i % 100 == 50) {
      const double h = 1e-6;
      const double deriv =
        (SmoothingKernel::cdf(u + h) - SmoothingKernel::cdf(u - h)) /
        (2.0 * h);
      CHECK_THAT(deriv,
                 Catch::Matchers::WithinAbs(SmoothingKernel::density(u),
                                            1e-6));
    }
  }
}

TEST_CASE("nine-point layout splits into three slabs of three")
{
  // The illustrative 2-D example: vertical axis is coordinate 1, and the
  // first split groups rows of three points.
  Eigen::MatrixXd pts(9, 2);
  pts << 0.05, 0.125,
         0.225, 0.575,
         0.15, 0.925,
         0.575, 0.3,
         0.4, 0.5,
         0.65, 0.875,
         0.825, 0.175,
         0.9, 0.7,
         0.75, 0.975;
  const Partition p = build_adaptive(pts);
  REQUIRE(p.cells_per_axis() == 3);

  // level-1 breakpoints: midpoints between sorted coordinate-1 groups
  const auto& breaks = p.root().breaks;
  REQUIRE(breaks.size() == 4);
  CHECK(breaks[0] == 0.0);
  CHECK_THAT(breaks[1], Catch::Matchers::WithinAbs(0.3125, 1e-15));
  CHECK_THAT(breaks[2], Catch::Matchers::WithinAbs(0.7, 1e-15));
  CHECK(breaks[3] == 1.0);

  // every cube holds exactly one point
  std::map<std::vector<int>, int> occupancy;
  for (Eigen::Index i = 0; i < 9; ++i) {
    occupancy[p.cell_of_point(i)] += 1;
  }
  CHECK(occupancy.size() == 9);
  for (const auto& [cell, count] : occupancy) {
    CHECK(count == 1);
  }
}

TEST_CASE("single point yields the single interval [0,1]")
{
  Eigen::MatrixXd pts(1, 1);
  pts << 0.37;
  const Partition p = build_adaptive(pts);
  CHECK(p.cells_per_axis() == 1);
  CHECK(p.root().breaks == std::vector<double>{ 0.0, 1.0 });
}

TEST_CASE("four points in 2-D split at hand-computed midpoints")
{
  Eigen::MatrixXd pts(4, 2);
  pts << 0.1, 0.1,
         0.2, 0.9,
         0.8, 0.2,
         0.9, 0.8;
  const Partition p = build_adaptive(pts);
  REQUIRE(p.cells_per_axis() == 2);
  CHECK_THAT(p.root().breaks[1], Catch::Matchers::WithinAbs(0.5, 1e-15));
  REQUIRE(p.root().children.size() == 2);
  CHECK_THAT(p.root().children[0].breaks[1],
             Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK_THAT(p.root().children[1].breaks[1],
             Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK(p.cell_of_point(0) == std::vector<int>{ 0, 0 });
  CHECK(p.cell_of_point(1) == std::vector<int>{ 0, 1 });
  CHECK(p.cell_of_point(2) == std::vector<int>{ 1, 0 });
  CHECK(p.cell_of_point(3) == std::vector<int>{ 1, 1 });
}

TEST_CASE("transform of the third sorted point of four lands at 179/324")
{
  Eigen::MatrixXd pts(4, 1);
  pts << 0.1, 0.3, 0.5, 0.9;
  const Partition p = build_adaptive(pts);
  REQUIRE(p.cells_per_axis() == 4);
  Eigen::VectorXd x(1);
  x << 0.5; // third sorted point; interval [0.4, 0.7), offset -1/6
  const Eigen::VectorXd out = p.transform(x);
  CHECK(out[0] >= 0.5);
  CHECK(out[0] < 0.75);
  CHECK_THAT(out[0], Catch::Matchers::WithinAbs(179.0 / 324.0, 1e-15));
}

TEST_CASE("interval midpoints map to cell centers")
{
  Eigen::MatrixXd pts(5, 1);
  pts << 0.11, 0.23, 0.47, 0.61, 0.83;
  const Partition p = build_adaptive(pts);
  const auto& breaks = p.root().breaks;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    Eigen::VectorXd x(1);
    x << 0.5 * (breaks[j] + breaks[j + 1]);
    const double expected = (static_cast<double>(j) + 0.5) / 5.0;
    CHECK_THAT(p.transform(x)[0],
               Catch::Matchers::WithinAbs(expected, 1e-15));
  }
}

TEST_CASE("grid property: every point lies strictly inside its cell")
{
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 3;
    const int n0_axis = 2 + trial % 5;
    Eigen::Index n = 1;
    for (int k = 0; k < d; ++k) {
      n *= n0_axis;
    }
    const Eigen::MatrixXd pts = random_unit_points(gen, n, d);
    const Partition p = build_adaptive(pts);
    REQUIRE(p.cells_per_axis() == n0_axis);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd out = p.transform(pts.row(i));
      const auto& cell = p.cell_of_point(i);
      for (int k = 0; k < d; ++k) {
        const double lo = static_cast<double>(cell[k]) / n0_axis;
        const double hi = static_cast<double>(cell[k] + 1) / n0_axis;
        REQUIRE(out[k] > lo);
        REQUIRE(out[k] < hi);
      }
    }
  }
}

TEST_CASE("non-perfect-power occupancies differ by at most one")
{
  std::mt19937_64 gen(7);
  for (Eigen::Index n : { 10, 17, 23, 40 }) {
    const Eigen::MatrixXd pts = random_unit_points(gen, n, 2);
    const Partition p = build_adaptive(pts);
    std::map<std::vector<int>, int> occupancy;
    for (Eigen::Index i = 0; i < n; ++i) {
      occupancy[p.cell_of_point(i)] += 1;
    }
    int lo = n, hi = 0;
    for (const auto& [cell, count] : occupancy) {
      lo = std::min(lo, count);
      hi = std::max(hi, count);
    }
    CHECK(hi - lo <= 1);
    // every point is inside the cube the partition assigned it
    for (Eigen::Index i = 0; i < n; ++i) {
      CHECK(p.locate(pts.row(i)) == p.cell_of_point(i));
    }
  }
}

TEST_CASE("output is continuous across interval breakpoints")
{
  std::mt19937_64 gen(13);
  const Eigen::MatrixXd pts = random_unit_points(gen, 49, 2);
  const Partition p = build_adaptive(pts);
  const auto& breaks = p.root().breaks;
  for (std::size_t j = 1; j + 1 < breaks.size(); ++j) {
    Eigen::VectorXd left(2), right(2);
    left << breaks[j] - 1e-9, 0.4;
    right << breaks[j] + 1e-9, 0.4;
    const double a = p.transform(left)[0];
    const double b = p.transform(right)[0];
    CHECK(std::abs(a - b) < 1e-6);
  }
}

TEST_CASE("coordinate map is strictly increasing inside a slab")
{
  std::mt19937_64 gen(29);
  const Eigen::MatrixXd pts = random_unit_points(gen, 36, 2);
  const Partition p = build_adaptive(pts);
  const double x1 = 0.312; // fixed first coordinate
  double prev = -1.0;
  for (int i = 0; i <= 500; ++i) {
    Eigen::VectorXd x(2);
    x << x1, static_cast<double>(i) / 500.0;
    const double out = p.transform(x)[1];
    CHECK(out > prev);
    prev = out;
  }
}

TEST_CASE("build rejects out-of-cube points and empty input")
{
  Eigen::MatrixXd bad(2, 1);
  bad << 0.5, 1.5;
  CHECK_THROWS_AS(build_adaptive(bad), std::invalid_argument);
  Eigen::MatrixXd empty(0, 2);
  CHECK_THROWS_AS(build_adaptive(empty), std::invalid_argument);
}

TEST_CASE("partition serializes breakpoints per node")
{
  std::mt19937_64 gen(3);
  const Eigen::MatrixXd pts = random_unit_points(gen, 9, 2);
  const Partition p = build_adaptive(pts);
  const nlohmann::json j = p.to_json();
  CHECK(j["cells_per_axis"] == 3);
  CHECK(j["tree"]["breaks"].size() == 4);
  CHECK(j["tree"]["children"].size() == 3);
  CHECK(j["tree"]["children"][0]["breaks"].size() == 4);
  CHECK_FALSE(j["tree"]["children"][0].contains("children"));
}
