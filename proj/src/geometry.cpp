#include "uwbsim/geometry.hpp"

#include <stdexcept>

namespace uwbsim {

double euclidean_distance(const Point3& a, const Point3& b) {
  if (!a.finite() || !b.finite()) {
    throw std::domain_error("euclidean_distance: non-finite point");
  }
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace uwbsim
