#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "uwbsim/anchor_table.hpp"
#include "uwbsim/channel.hpp"
#include "uwbsim/clock.hpp"
#include "uwbsim/twr.hpp"

namespace uwbsim {

/// Round-robin polling plan: a fixed slot per anchor, anchors in list order.
struct Schedule {
  std::int64_t slot_ms = 50;
  std::vector<AnchorId> anchors;

  Picoseconds slot_ps() const { return ms_to_ps(slot_ms); }

  /// Duration of one full polling cycle; exactly slot * anchor count.
  Picoseconds round_trip_ps() const {
    return slot_ps() * static_cast<std::int64_t>(anchors.size());
  }

  /// Throws ConfigError on empty/duplicate anchors or non-positive slot.
  void validate() const;
};

/// One polling cycle: a measurement per scheduled anchor, in schedule order.
struct RoundResult {
  std::int64_t round_index = 0;
  std::vector<RangeMeasurement> measurements;
  Picoseconds t_round_start = 0;
  Picoseconds t_round_end = 0;
};

/// Per-link simulation setup of a ranging scenario.
struct RangingScenario {
  Point3 tag_pos;
  AnchorTable anchors;
  DeviceClock tag_clock;
  std::map<AnchorId, DeviceClock> anchor_clocks;          ///< ideal if absent
  ChannelProfile default_channel;
  std::map<AnchorId, ChannelProfile> channel_overrides;   ///< per-link NLOS etc.
  Picoseconds reply_time = ms_to_ps(1);

  const ChannelProfile& channel_for(AnchorId id) const;
  DeviceClock clock_for(AnchorId id) const;
};

/// Deterministic single-threaded ranging driver on a virtual clock.
///
/// Each link draws from its own stream keyed by (seed, anchor id) plus an
/// optional stream_key (grid runs key it by cell), so results never depend
/// on what other links or sessions consumed.
class Session {
 public:
  Session(Schedule schedule, RangingScenario scenario, RngSeed seed,
          std::uint64_t stream_key = 0, Picoseconds t_start = 0);

  /// Runs one round at slot boundaries; the virtual clock advances exactly
  /// one round_trip_ps. Throws ConfigError when a scheduled anchor is not
  /// provisioned (checked before any exchange runs).
  RoundResult run_round();

  /// Runs n_rounds consecutive rounds with contiguous virtual time.
  std::vector<RoundResult> run_session(std::int64_t n_rounds);

  Picoseconds now() const { return now_; }
  const Schedule& schedule() const { return schedule_; }
  const RangingScenario& scenario() const { return scenario_; }

 private:
  Schedule schedule_;
  RangingScenario scenario_;
  std::map<AnchorId, RngStream> streams_;
  Picoseconds now_ = 0;
  std::int64_t round_index_ = 0;
};

}  // namespace uwbsim
