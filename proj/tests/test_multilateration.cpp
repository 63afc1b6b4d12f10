#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "uwbsim/errors.hpp"
#include "uwbsim/multilateration.hpp"

using namespace uwbsim;

namespace {

std::vector<std::pair<Point3, double>> exact_ranges(const Point3& truth) {
  std::vector<std::pair<Point3, double>> ranges;
  for (const Point3& a : test::room_anchor_positions()) {
    ranges.emplace_back(a, euclidean_distance(truth, a));
  }
  return ranges;
}

}  // namespace

TEST_CASE("exact ranges invert to the true position") {
  const Point3 truth{4.0, 5.0, 1.0};
  const auto result = solve_multilateration(exact_ranges(truth));
  CHECK(std::abs(result.position.x - truth.x) < 1e-6);
  CHECK(std::abs(result.position.y - truth.y) < 1e-6);
  CHECK(std::abs(result.position.z - truth.z) < 1e-6);
  CHECK(result.residual_rms < 1e-9);
}

TEST_CASE("random geometries invert to the truth") {
  RngStream rng = RngStream::derive(17, {1});
  for (int i = 0; i < 100; ++i) {
    const Point3 truth = test::random_point(rng, 8.0, 7.0, 2.5);
    const auto result = solve_multilateration(exact_ranges(truth));
    CHECK(euclidean_distance(result.position, truth) < 1e-6);
  }
}

TEST_CASE("three anchors are rejected as rank-deficient") {
  const Point3 truth{4.0, 5.0, 1.0};
  auto ranges = exact_ranges(truth);
  ranges.resize(3);
  CHECK_THROWS_AS(solve_multilateration(ranges), GeometryError);
}

TEST_CASE("coplanar anchors are rejected even with four of them") {
  const Point3 truth{4.0, 5.0, 1.0};
  std::vector<std::pair<Point3, double>> ranges;
  for (const Point3 a : {Point3{0, 0, 3}, Point3{8, 0, 3}, Point3{8, 8, 3}, Point3{0, 8, 3}}) {
    ranges.emplace_back(a, euclidean_distance(truth, a));
  }
  CHECK_THROWS_AS(solve_multilateration(ranges), GeometryError);
}

TEST_CASE("uniform NLOS inflation biases the fix and leaves residual") {
  const Point3 truth{4.0, 5.0, 1.0};
  auto ranges = exact_ranges(truth);
  for (auto& [a, r] : ranges) {
    r += 0.4;
  }
  const auto result = solve_multilateration(ranges);
  CHECK(result.residual_rms > 0.01);
  CHECK(euclidean_distance(result.position, truth) > 0.01);
  // all ranges longer: the least-squares fix moves away from the anchor cloud
  Point3 centroid;
  for (const auto& [a, r] : ranges) {
    centroid = centroid + a;
  }
  centroid = centroid * (1.0 / static_cast<double>(ranges.size()));
  CHECK(euclidean_distance(result.position, centroid) >
        euclidean_distance(truth, centroid) - 0.05);
}

TEST_CASE("noisy ranges still converge near the truth") {
  RngStream rng = RngStream::derive(19, {2});
  const Point3 truth{3.0, 4.0, 1.2};
  auto ranges = exact_ranges(truth);
  for (auto& [a, r] : ranges) {
    r += 0.05 * rng.next_gaussian();
  }
  const auto result = solve_multilateration(ranges);
  CHECK(euclidean_distance(result.position, truth) < 0.5);
}

TEST_CASE("initial guess variant converges from offset starts") {
  const Point3 truth{4.0, 5.0, 1.0};
  const auto result = solve_multilateration(exact_ranges(truth), Point3{1.0, 1.0, 0.1});
  CHECK(euclidean_distance(result.position, truth) < 1e-6);
}
