#pragma once

#include <optional>

#include "uwbsim/rng.hpp"

namespace uwbsim {

/// Stochastic model of one radio link.
///
/// Perturbations act on the one-way path length: zero-mean Gaussian ranging
/// noise, a constant positive NLOS bias, and occasional multipath outliers
/// that only ever lengthen the path. Packets are lost with loss_prob.
struct ChannelProfile {
  double noise_sigma = 0.0;   ///< std of Gaussian path noise [m]
  double nlos_bias = 0.0;     ///< added when nlos is set [m], >= 0
  bool nlos = false;
  double outlier_prob = 0.0;  ///< probability of a multipath outlier draw
  double outlier_extra = 0.0; ///< extra path length on an outlier [m], >= 0
  double loss_prob = 0.0;     ///< packet loss probability
  bool per_message = false;   ///< perturb poll and response independently

  bool valid() const {
    return nlos_bias >= 0.0 && outlier_extra >= 0.0 &&
           noise_sigma >= 0.0 &&
           outlier_prob >= 0.0 && outlier_prob <= 1.0 &&
           loss_prob >= 0.0 && loss_prob <= 1.0;
  }

  /// Line-of-sight defaults used by the evaluation protocol. noise_sigma is
  /// a calibration knob: 5 cm of one-way path noise puts the fused position
  /// spread where a well-tuned real deployment lands.
  static ChannelProfile default_los() {
    ChannelProfile p;
    p.noise_sigma = 0.05;
    p.loss_prob = 0.01;
    return p;
  }
};

/// Applies the channel to a true path length. Returns the perturbed length
/// (clamped at 0) or nullopt when the packet is lost.
///
/// Draw order is fixed for stream stability: loss (only if loss_prob > 0),
/// Gaussian noise (only if noise_sigma > 0), outlier (only if
/// outlier_prob > 0). The NLOS bias consumes no draw, so toggling it leaves
/// the rest of the stream untouched.
std::optional<double> perturb_path(double true_distance, const ChannelProfile& profile,
                                   RngStream& rng);

}  // namespace uwbsim
