#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace uwbsim {

/// Seed of a simulation run. Identical seed + identical scenario gives
/// bit-identical output.
using RngSeed = std::uint64_t;

/// Collapses two stream-key components into one without collisions in
/// practice (splitmix64 finalizer on each side).
std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b);

/// Deterministic counter-based random stream (splitmix64 core).
///
/// Streams are derived, not shared: every simulated link gets its own stream
/// keyed by (seed, anchor id) -- and by cell indices in grid runs -- so the
/// draw sequence of one link never depends on what other links consumed.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t state) : state_(state) {}

  /// Derives an independent stream from a seed and a list of stream keys.
  static RngStream derive(RngSeed seed, std::initializer_list<std::uint64_t> keys);
  static RngStream derive(RngSeed seed, const std::vector<std::uint64_t>& keys);

  std::uint64_t next_u64();

  /// Uniform draw in [0, 1) with 53 bits of resolution.
  double next_unit();

  /// Standard normal draw (Box-Muller, pairwise).
  double next_gaussian();

 private:
  std::uint64_t state_ = 0x853c49e6748fea9bULL;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace uwbsim
