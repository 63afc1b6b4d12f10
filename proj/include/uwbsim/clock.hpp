#pragma once

#include <cstdint>

namespace uwbsim {

/// Simulated (virtual) time in integer picoseconds.
using Picoseconds = std::int64_t;

inline constexpr Picoseconds picoseconds_per_millisecond = 1'000'000'000;

constexpr Picoseconds ms_to_ps(std::int64_t ms) {
  return ms * picoseconds_per_millisecond;
}

/// Free-running counter of one device, read against global simulation time.
///
/// A reading is offset + t * (1 + drift_ppm * 1e-6), quantized to the tick
/// size. drift_ppm is the fractional frequency error of the crystal: a
/// positive value means the clock runs fast and its readings accumulate
/// ahead of global time.
struct DeviceClock {
  double offset_ps = 0.0;    ///< counter phase at global t = 0
  double drift_ppm = 0.0;    ///< frequency error, |drift_ppm| <= 100
  double tick_ps = 1.0;      ///< counter quantum; 15.65 for DWM3000-like coarse mode

  /// Counter reading (in ticks) at global time t_global_ps.
  std::int64_t read(double t_global_ps) const;

  /// Global time [ps] at which the counter shows `reading` ticks; exact
  /// inverse of read() up to the tick quantum.
  double global_from_reading(std::int64_t reading) const;

  bool plausible() const {
    return drift_ppm >= -100.0 && drift_ppm <= 100.0 && tick_ps > 0.0;
  }
};

}  // namespace uwbsim
