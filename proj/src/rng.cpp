#include "uwbsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace uwbsim {

namespace {

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
  return mix(mix(a) ^ b);
}

RngStream RngStream::derive(RngSeed seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix(seed);
  for (std::uint64_t k : keys) {
    h = mix(h ^ mix(k));
  }
  return RngStream(h);
}

RngStream RngStream::derive(RngSeed seed, const std::vector<std::uint64_t>& keys) {
  std::uint64_t h = mix(seed);
  for (std::uint64_t k : keys) {
    h = mix(h ^ mix(k));
  }
  return RngStream(h);
}

std::uint64_t RngStream::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 kept away from 0 so the log is finite.
  double u1 = 0.0;
  do {
    u1 = next_unit();
  } while (u1 <= 0.0);
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace uwbsim
