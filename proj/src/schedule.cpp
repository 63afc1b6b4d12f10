#include "uwbsim/schedule.hpp"

#include <set>

#include "uwbsim/anchor_table.hpp"
#include "uwbsim/errors.hpp"

namespace uwbsim {

void Schedule::validate() const {
  if (anchors.empty()) {
    throw ConfigError("schedule: anchor list is empty");
  }
  if (slot_ms <= 0 || slot_ms > 1'000'000) {
    throw ConfigError("schedule: slot duration out of range");
  }
  std::set<AnchorId> seen;
  for (AnchorId id : anchors) {
    if (!seen.insert(id).second) {
      throw ConfigError("schedule: duplicate anchor " + format_anchor_id(id));
    }
  }
}

const ChannelProfile& RangingScenario::channel_for(AnchorId id) const {
  auto it = channel_overrides.find(id);
  return it != channel_overrides.end() ? it->second : default_channel;
}

DeviceClock RangingScenario::clock_for(AnchorId id) const {
  auto it = anchor_clocks.find(id);
  return it != anchor_clocks.end() ? it->second : DeviceClock{};
}

Session::Session(Schedule schedule, RangingScenario scenario, RngSeed seed,
                 std::uint64_t stream_key, Picoseconds t_start)
    : schedule_(std::move(schedule)), scenario_(std::move(scenario)), now_(t_start) {
  schedule_.validate();
  for (AnchorId id : schedule_.anchors) {
    if (!scenario_.anchors.contains(id)) {
      throw ConfigError("session: anchor " + format_anchor_id(id) +
                        " is not provisioned in the anchor table");
    }
    streams_.emplace(id, RngStream::derive(seed, {stream_key, id.value}));
  }
}

RoundResult Session::run_round() {
  RoundResult result;
  result.round_index = round_index_++;
  result.t_round_start = now_;
  result.measurements.reserve(schedule_.anchors.size());

  for (std::size_t slot = 0; slot < schedule_.anchors.size(); ++slot) {
    const AnchorId id = schedule_.anchors[slot];
    const Picoseconds t_poll =
        result.t_round_start + schedule_.slot_ps() * static_cast<std::int64_t>(slot);
    const Point3 anchor_pos = scenario_.anchors.entries.at(id);
    auto exchange =
        run_exchange(scenario_.tag_pos, anchor_pos, scenario_.tag_clock,
                     scenario_.clock_for(id), scenario_.reply_time, scenario_.channel_for(id),
                     t_poll, id, streams_.at(id));
    result.measurements.push_back(
        make_measurement(exchange, id, t_poll, scenario_.tag_clock));
  }

  now_ = result.t_round_start + schedule_.round_trip_ps();
  result.t_round_end = now_;
  return result;
}

std::vector<RoundResult> Session::run_session(std::int64_t n_rounds) {
  if (n_rounds < 1) {
    throw ConfigError("session: n_rounds must be >= 1");
  }
  std::vector<RoundResult> rounds;
  rounds.reserve(static_cast<std::size_t>(n_rounds));
  for (std::int64_t i = 0; i < n_rounds; ++i) {
    rounds.push_back(run_round());
  }
  return rounds;
}

}  // namespace uwbsim
