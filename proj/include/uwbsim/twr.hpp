#pragma once

#include <cstdint>
#include <optional>

#include "uwbsim/channel.hpp"
#include "uwbsim/clock.hpp"
#include "uwbsim/geometry.hpp"
#include "uwbsim/rng.hpp"

namespace uwbsim {

/// The four timestamps of one single-sided poll/response handshake.
///
/// Tag-side timestamps (t_send_poll, t_receive_response) are readings of the
/// tag's counter; anchor-side timestamps are readings of the anchor's
/// counter. Counts are in ticks of tick_ps picoseconds (1 ps by default).
struct TwrExchange {
  std::int64_t t_send_poll = 0;
  std::int64_t t_receive_poll = 0;
  std::int64_t t_send_response = 0;
  std::int64_t t_receive_response = 0;
  AnchorId anchor;
  double tick_ps = 1.0;

  bool ordering_ok() const {
    return t_receive_response > t_send_poll && t_send_response > t_receive_poll;
  }
};

/// One anchor-to-tag distance estimate produced by the ranging engine.
struct RangeMeasurement {
  enum class Status : std::uint8_t {
    Ok,          ///< plausible distance, usable by the filter
    Lost,        ///< the channel dropped the exchange
    NegativeTof, ///< mild negative TOF (drift artifact), rejected
    Implausible, ///< TOF below -1 ns, rejected
  };

  AnchorId anchor;
  double distance_m = 0.0;
  Picoseconds sim_time = 0;  ///< global time at completion of the exchange
  bool valid = false;
  Status status = Status::Lost;
};

/// Time of flight recovered from a handshake [ps]:
///   ((t_receive_response - t_send_poll) - (t_send_response - t_receive_poll)) / 2
/// May be slightly negative under adversarial clock drift; callers decide
/// validity. Throws MalformedExchangeError when the timestamp ordering
/// invariants are violated.
double compute_tof(const TwrExchange& ex);

/// distance = tof * c. Negative TOF maps to negative distance.
double tof_to_distance(double tof_ps);

/// TOF threshold below which an exchange is considered implausible [ps].
inline constexpr double implausible_tof_ps = -1000.0;

/// Forward-simulates one handshake starting at global time t_start.
///
/// The poll propagates over the (channel-perturbed) path, the anchor replies
/// after reply_time of true time, and each event is timestamped through the
/// owning device's counter. Returns nullopt when the channel drops a message.
std::optional<TwrExchange> run_exchange(const Point3& tag_pos, const Point3& anchor_pos,
                                        const DeviceClock& tag_clock,
                                        const DeviceClock& anchor_clock,
                                        Picoseconds reply_time, const ChannelProfile& channel,
                                        Picoseconds t_start, AnchorId anchor, RngStream& rng);

/// Classifies an exchange outcome into a RangeMeasurement. Successful
/// exchanges are stamped at the global completion instant (recovered through
/// the tag clock); losses at the poll instant.
RangeMeasurement make_measurement(const std::optional<TwrExchange>& ex, AnchorId anchor,
                                  Picoseconds t_poll, const DeviceClock& tag_clock);

}  // namespace uwbsim
