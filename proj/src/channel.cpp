#include "uwbsim/channel.hpp"

#include <algorithm>

namespace uwbsim {

std::optional<double> perturb_path(double true_distance, const ChannelProfile& profile,
                                   RngStream& rng) {
  if (profile.loss_prob > 0.0 && rng.next_unit() < profile.loss_prob) {
    return std::nullopt;
  }
  double d = true_distance;
  if (profile.noise_sigma > 0.0) {
    d += profile.noise_sigma * rng.next_gaussian();
  }
  if (profile.nlos) {
    d += profile.nlos_bias;
  }
  if (profile.outlier_prob > 0.0 && rng.next_unit() < profile.outlier_prob) {
    d += profile.outlier_extra;
  }
  return std::max(d, 0.0);
}

}  // namespace uwbsim
