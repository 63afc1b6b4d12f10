#pragma once

#include <utility>
#include <vector>

#include "uwbsim/geometry.hpp"

namespace uwbsim {

struct MultilaterationOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-12;  ///< meters; convergence on |delta|
};

struct MultilaterationResult {
  Point3 position;
  double residual_rms = 0.0;  ///< rms of (dist_i - range_i) at the solution [m]
  int iterations = 0;
};

/// Verifies that at least 4 anchors span all three dimensions; throws
/// GeometryError for too few, coplanar or collinear anchors.
void check_anchor_span(const std::vector<Point3>& anchors);

/// Gauss-Newton least squares on range residuals (dist_i(p) - range_i).
///
/// Requires at least 4 anchors spanning 3-D (non-coplanar); throws
/// GeometryError otherwise, NoFixError when the iteration does not converge.
/// The initial guess defaults to the anchor centroid.
MultilaterationResult solve_multilateration(
    const std::vector<std::pair<Point3, double>>& ranges,
    const MultilaterationOptions& options = {});

MultilaterationResult solve_multilateration(
    const std::vector<std::pair<Point3, double>>& ranges, const Point3& initial_guess,
    const MultilaterationOptions& options = {});

}  // namespace uwbsim
