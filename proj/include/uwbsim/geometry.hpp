#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace uwbsim {

namespace constants {
/// Speed of light in vacuum [m/s], exact by SI definition.
inline constexpr double speed_of_light = 299792458.0;
}  // namespace constants

/// A position in meters in the room frame. Origin is the room corner,
/// axes chosen so that all anchor coordinates are positive.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }

  friend Point3 operator+(const Point3& a, const Point3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Point3 operator-(const Point3& a, const Point3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Point3 operator*(const Point3& a, double s) {
    return {a.x * s, a.y * s, a.z * s};
  }
  friend bool operator==(const Point3& a, const Point3& b) = default;
};

/// Identifier of a fixed anchor device. The demo deployment uses 0x02..0x06.
struct AnchorId {
  std::uint8_t value = 0;

  friend auto operator<=>(const AnchorId&, const AnchorId&) = default;
};

/// Euclidean distance between two points [m]. Throws std::domain_error on
/// non-finite input.
double euclidean_distance(const Point3& a, const Point3& b);

}  // namespace uwbsim
