#include "uwbsim/clock.hpp"

#include <cmath>

namespace uwbsim {

std::int64_t DeviceClock::read(double t_global_ps) const {
  const double raw = offset_ps + t_global_ps * (1.0 + drift_ppm * 1e-6);
  if (tick_ps == 1.0) {
    return std::llround(raw);
  }
  return std::llround(raw / tick_ps);
}

double DeviceClock::global_from_reading(std::int64_t reading) const {
  return (static_cast<double>(reading) * tick_ps - offset_ps) / (1.0 + drift_ppm * 1e-6);
}

}  // namespace uwbsim
