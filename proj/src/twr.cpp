#include "uwbsim/twr.hpp"

#include <cmath>

#include "uwbsim/errors.hpp"

namespace uwbsim {

double compute_tof(const TwrExchange& ex) {
  if (!ex.ordering_ok()) {
    throw MalformedExchangeError("compute_tof: timestamp ordering violated");
  }
  const std::int64_t round_ticks = ex.t_receive_response - ex.t_send_poll;
  const std::int64_t reply_ticks = ex.t_send_response - ex.t_receive_poll;
  return static_cast<double>(round_ticks - reply_ticks) * ex.tick_ps * 0.5;
}

double tof_to_distance(double tof_ps) {
  return tof_ps * 1e-12 * constants::speed_of_light;
}

std::optional<TwrExchange> run_exchange(const Point3& tag_pos, const Point3& anchor_pos,
                                        const DeviceClock& tag_clock,
                                        const DeviceClock& anchor_clock,
                                        Picoseconds reply_time, const ChannelProfile& channel,
                                        Picoseconds t_start, AnchorId anchor, RngStream& rng) {
  if (reply_time <= 0) {
    throw ConfigError("run_exchange: reply_time must be positive");
  }
  if (tag_clock.tick_ps != anchor_clock.tick_ps) {
    throw ConfigError("run_exchange: tag and anchor counters must share one tick size");
  }
  const double true_distance = euclidean_distance(tag_pos, anchor_pos);

  double poll_path, response_path;
  if (channel.per_message) {
    auto p1 = perturb_path(true_distance, channel, rng);
    if (!p1) return std::nullopt;
    auto p2 = perturb_path(true_distance, channel, rng);
    if (!p2) return std::nullopt;
    poll_path = *p1;
    response_path = *p2;
  } else {
    // One perturbation per exchange: both messages cross the same geometry.
    auto p = perturb_path(true_distance, channel, rng);
    if (!p) return std::nullopt;
    poll_path = response_path = *p;
  }

  constexpr double ps_per_meter = 1e12 / constants::speed_of_light;
  const double t_send_poll = static_cast<double>(t_start);
  const double t_receive_poll = t_send_poll + poll_path * ps_per_meter;
  const double t_send_response = t_receive_poll + static_cast<double>(reply_time);
  const double t_receive_response = t_send_response + response_path * ps_per_meter;

  TwrExchange ex;
  ex.anchor = anchor;
  ex.tick_ps = tag_clock.tick_ps;
  ex.t_send_poll = tag_clock.read(t_send_poll);
  ex.t_receive_poll = anchor_clock.read(t_receive_poll);
  ex.t_send_response = anchor_clock.read(t_send_response);
  ex.t_receive_response = tag_clock.read(t_receive_response);
  return ex;
}

RangeMeasurement make_measurement(const std::optional<TwrExchange>& ex, AnchorId anchor,
                                  Picoseconds t_poll, const DeviceClock& tag_clock) {
  RangeMeasurement m;
  m.anchor = anchor;
  if (!ex) {
    m.sim_time = t_poll;
    m.status = RangeMeasurement::Status::Lost;
    return m;
  }
  const double tof = compute_tof(*ex);
  m.distance_m = tof_to_distance(tof);
  m.sim_time = std::llround(tag_clock.global_from_reading(ex->t_receive_response));
  if (tof < implausible_tof_ps) {
    m.status = RangeMeasurement::Status::Implausible;
  } else if (tof < 0.0) {
    m.status = RangeMeasurement::Status::NegativeTof;
  } else {
    m.status = RangeMeasurement::Status::Ok;
    m.valid = true;
  }
  return m;
}

}  // namespace uwbsim
