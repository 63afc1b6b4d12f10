#include "uwbsim/multilateration.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "uwbsim/errors.hpp"

namespace uwbsim {

namespace {

Point3 centroid(const std::vector<std::pair<Point3, double>>& ranges) {
  Point3 c;
  for (const auto& [pos, r] : ranges) {
    c = c + pos;
  }
  const double inv = 1.0 / static_cast<double>(ranges.size());
  return c * inv;
}

}  // namespace

// Anchors must span 3-D; the smallest singular value of the centered anchor
// matrix vanishes for coplanar sets.
void check_anchor_span(const std::vector<Point3>& anchors) {
  if (anchors.size() < 4) {
    throw GeometryError("need at least 4 anchors for a 3-D fix");
  }
  Point3 c;
  for (const Point3& a : anchors) {
    c = c + a;
  }
  c = c * (1.0 / static_cast<double>(anchors.size()));
  Eigen::MatrixXd centered(anchors.size(), 3);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const Point3 d = anchors[i] - c;
    centered(static_cast<Eigen::Index>(i), 0) = d.x;
    centered(static_cast<Eigen::Index>(i), 1) = d.y;
    centered(static_cast<Eigen::Index>(i), 2) = d.z;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto& s = svd.singularValues();
  if (s(2) <= 1e-9 * std::max(s(0), 1.0)) {
    throw GeometryError("anchors are coplanar/collinear (rank-deficient geometry)");
  }
}

namespace {

// Linearized warm start: subtracting the squared-range equation of the first
// anchor from the others leaves a linear system in p. Keeps Gauss-Newton out
// of local minima far from the anchor hull.
Point3 linear_least_squares_seed(const std::vector<std::pair<Point3, double>>& ranges) {
  const auto n = static_cast<Eigen::Index>(ranges.size());
  const Point3& ref = ranges[0].first;
  const double r0 = ranges[0].second;
  const double ref_sq = ref.x * ref.x + ref.y * ref.y + ref.z * ref.z;

  Eigen::MatrixXd a(n - 1, 3);
  Eigen::VectorXd b(n - 1);
  for (Eigen::Index i = 1; i < n; ++i) {
    const Point3& ai = ranges[static_cast<std::size_t>(i)].first;
    const double ri = ranges[static_cast<std::size_t>(i)].second;
    a(i - 1, 0) = 2.0 * (ai.x - ref.x);
    a(i - 1, 1) = 2.0 * (ai.y - ref.y);
    a(i - 1, 2) = 2.0 * (ai.z - ref.z);
    b(i - 1) = r0 * r0 - ri * ri + (ai.x * ai.x + ai.y * ai.y + ai.z * ai.z) - ref_sq;
  }
  const Eigen::Vector3d p = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  if (!p.allFinite()) {
    return centroid(ranges);
  }
  return {p(0), p(1), p(2)};
}

}  // namespace

MultilaterationResult solve_multilateration(
    const std::vector<std::pair<Point3, double>>& ranges,
    const MultilaterationOptions& options) {
  if (ranges.size() < 4) {
    throw GeometryError("need at least 4 anchors for a 3-D fix");
  }
  return solve_multilateration(ranges, linear_least_squares_seed(ranges), options);
}

MultilaterationResult solve_multilateration(
    const std::vector<std::pair<Point3, double>>& ranges, const Point3& initial_guess,
    const MultilaterationOptions& options) {
  std::vector<Point3> anchors;
  anchors.reserve(ranges.size());
  for (const auto& [pos, r] : ranges) {
    anchors.push_back(pos);
  }
  check_anchor_span(anchors);

  const auto n = static_cast<Eigen::Index>(ranges.size());
  Eigen::Vector3d p(initial_guess.x, initial_guess.y, initial_guess.z);
  Eigen::VectorXd residual(n);
  Eigen::MatrixXd jacobian(n, 3);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Point3& a = ranges[static_cast<std::size_t>(i)].first;
      Eigen::Vector3d delta = p - Eigen::Vector3d(a.x, a.y, a.z);
      double dist = delta.norm();
      if (dist < 1e-9) {
        // Sitting exactly on an anchor leaves the gradient undefined; nudge.
        delta = Eigen::Vector3d(1e-6, 0, 0);
        dist = 1e-6;
      }
      residual(i) = dist - ranges[static_cast<std::size_t>(i)].second;
      jacobian.row(i) = delta.transpose() / dist;
    }

    const Eigen::Matrix3d normal = jacobian.transpose() * jacobian;
    const Eigen::Vector3d rhs = -jacobian.transpose() * residual;
    const Eigen::Vector3d step = normal.ldlt().solve(rhs);
    p += step;

    if (step.norm() < options.step_tolerance) {
      MultilaterationResult result;
      result.position = {p(0), p(1), p(2)};
      for (Eigen::Index i = 0; i < n; ++i) {
        const Point3& a = ranges[static_cast<std::size_t>(i)].first;
        residual(i) = (p - Eigen::Vector3d(a.x, a.y, a.z)).norm() -
                      ranges[static_cast<std::size_t>(i)].second;
      }
      result.residual_rms = std::sqrt(residual.squaredNorm() / static_cast<double>(n));
      result.iterations = iter;
      return result;
    }
  }
  throw NoFixError("multilateration: Gauss-Newton did not converge");
}

}  // namespace uwbsim
