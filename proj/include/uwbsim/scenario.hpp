#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "uwbsim/ekf.hpp"
#include "uwbsim/eval.hpp"
#include "uwbsim/schedule.hpp"

namespace uwbsim {

/// Everything a run needs, read from one key-value scenario file.
///
/// Sections: [sim] (seed, anchor_file, reply_time_ms, tag), [schedule]
/// (slot_ms, anchors), [channel] and [channel.0xNN] overrides, [clock.tag] /
/// [clock.0xNN], [ekf], [grid]. Unknown keys are rejected.
struct ScenarioConfig {
  std::filesystem::path anchor_file;
  RngSeed seed = 1;
  Point3 tag_pos{4.0, 5.0, 1.0};
  Schedule schedule;                 ///< anchors default to the table order
  ChannelProfile channel = ChannelProfile::default_los();
  std::map<AnchorId, ChannelProfile> channel_overrides;
  DeviceClock tag_clock;
  std::map<AnchorId, DeviceClock> anchor_clocks;
  Picoseconds reply_time = ms_to_ps(1);
  EkfParams ekf;
  UpdateMode ekf_mode = UpdateMode::Sequential;
  GridSpec grid;
  GridOptions grid_options;

  /// Loads the anchor table from anchor_file. Throws ConfigError when no
  /// file is configured, NotProvisionedError when it is missing.
  AnchorTable resolve_anchors() const;

  /// The schedule to run: configured anchor order, or every provisioned
  /// anchor in id order when none was given. Checks scheduled ids against
  /// the table before anything runs.
  Schedule effective_schedule(const AnchorTable& table) const;

  /// Scenario ready to drive a Session at the configured tag position.
  RangingScenario make_scenario(const AnchorTable& table) const;
};

/// Parses the scenario file. Throws ParseError with a line reference.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Parses scenario text (exposed for tests).
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<memory>");

}  // namespace uwbsim
