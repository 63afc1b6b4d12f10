#include "uwbsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "uwbsim/detail/format.hpp"
#include "uwbsim/errors.hpp"

namespace uwbsim {

namespace {

struct Cursor {
  std::string origin;
  int line_no = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(origin + ":" + std::to_string(line_no) + ": " + what);
  }
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const Cursor& at, const std::string& value) {
  double out = 0.0;
  if (!detail::parse_double(value, out)) {
    at.fail("expected a number, got `" + value + "`");
  }
  return out;
}

std::int64_t parse_integer(const Cursor& at, const std::string& value) {
  std::int64_t out = 0;
  if (!detail::parse_int64(value, out)) {
    at.fail("expected an integer, got `" + value + "`");
  }
  return out;
}

bool parse_bool(const Cursor& at, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  at.fail("expected true/false, got `" + value + "`");
}

Point3 parse_point(const Cursor& at, const std::string& value) {
  std::string normalized = value;
  for (char& c : normalized) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(normalized);
  Point3 p;
  if (!(in >> p.x >> p.y >> p.z)) {
    at.fail("expected `x,y,z`, got `" + value + "`");
  }
  std::string rest;
  if (in >> rest) {
    at.fail("trailing text after point: `" + rest + "`");
  }
  return p;
}

void set_channel_key(const Cursor& at, ChannelProfile& ch, const std::string& key,
                     const std::string& value) {
  if (key == "noise_sigma") ch.noise_sigma = parse_number(at, value);
  else if (key == "nlos_bias") ch.nlos_bias = parse_number(at, value);
  else if (key == "nlos") ch.nlos = parse_bool(at, value);
  else if (key == "outlier_prob") ch.outlier_prob = parse_number(at, value);
  else if (key == "outlier_extra") ch.outlier_extra = parse_number(at, value);
  else if (key == "loss_prob") ch.loss_prob = parse_number(at, value);
  else if (key == "per_message") ch.per_message = parse_bool(at, value);
  else at.fail("unknown channel key `" + key + "`");
}

void set_clock_key(const Cursor& at, DeviceClock& clock, const std::string& key,
                   const std::string& value) {
  if (key == "offset_ps") clock.offset_ps = parse_number(at, value);
  else if (key == "drift_ppm") clock.drift_ppm = parse_number(at, value);
  else if (key == "tick_ps") clock.tick_ps = parse_number(at, value);
  else at.fail("unknown clock key `" + key + "`");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
  ScenarioConfig config;
  Cursor at{origin, 0};
  std::string section = "sim";

  // Per-link overrides are replayed on top of the final base profile after
  // the whole file is read, so section order cannot matter.
  struct ChannelOverrideKey {
    AnchorId id;
    Cursor at;
    std::string key, value;
  };
  std::vector<ChannelOverrideKey> channel_override_keys;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++at.line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) at.fail("empty key or value");

    if (section == "sim") {
      if (key == "seed") {
        std::uint64_t seed = 0;
        if (!detail::parse_uint64(value, seed)) at.fail("bad seed");
        config.seed = seed;
      } else if (key == "anchor_file") {
        config.anchor_file = value;
      } else if (key == "reply_time_ms") {
        config.reply_time = static_cast<Picoseconds>(
            std::llround(parse_number(at, value) * 1e9));
        if (config.reply_time <= 0) at.fail("reply_time_ms must be positive");
      } else if (key == "tag") {
        config.tag_pos = parse_point(at, value);
      } else {
        at.fail("unknown [sim] key `" + key + "`");
      }
    } else if (section == "schedule") {
      if (key == "slot_ms") {
        config.schedule.slot_ms = parse_integer(at, value);
      } else if (key == "anchors") {
        config.schedule.anchors.clear();
        std::istringstream ids(value);
        std::string tok;
        while (ids >> tok) {
          auto id = parse_anchor_id(tok);
          if (!id) at.fail("bad anchor id `" + tok + "`");
          config.schedule.anchors.push_back(*id);
        }
      } else {
        at.fail("unknown [schedule] key `" + key + "`");
      }
    } else if (section == "channel") {
      set_channel_key(at, config.channel, key, value);
    } else if (section.rfind("channel.", 0) == 0) {
      auto id = parse_anchor_id(section.substr(8));
      if (!id) at.fail("bad channel override section `" + section + "`");
      set_channel_key(at, config.channel_overrides.try_emplace(*id).first->second, key,
                      value);  // syntax check now, real value replayed below
      channel_override_keys.push_back({*id, at, key, value});
    } else if (section == "clock.tag") {
      set_clock_key(at, config.tag_clock, key, value);
    } else if (section.rfind("clock.", 0) == 0) {
      auto id = parse_anchor_id(section.substr(6));
      if (!id) at.fail("bad clock section `" + section + "`");
      set_clock_key(at, config.anchor_clocks[*id], key, value);
    } else if (section == "ekf") {
      if (key == "q_accel") config.ekf.q_accel = parse_number(at, value);
      else if (key == "r_range") config.ekf.r_range = parse_number(at, value);
      else if (key == "p0_pos") config.ekf.p0_pos = parse_number(at, value);
      else if (key == "p0_vel") config.ekf.p0_vel = parse_number(at, value);
      else if (key == "dt") config.ekf.dt = parse_number(at, value);
      else if (key == "gate_sigma") config.ekf.gate_sigma = parse_number(at, value);
      else if (key == "mode") {
        if (value == "sequential") config.ekf_mode = UpdateMode::Sequential;
        else if (value == "batch") config.ekf_mode = UpdateMode::Batch;
        else at.fail("ekf mode must be sequential or batch");
      } else at.fail("unknown [ekf] key `" + key + "`");
    } else if (section == "grid") {
      if (key == "x_min") config.grid.x_min = parse_number(at, value);
      else if (key == "x_max") config.grid.x_max = parse_number(at, value);
      else if (key == "x_step") config.grid.x_step = parse_number(at, value);
      else if (key == "y_min") config.grid.y_min = parse_number(at, value);
      else if (key == "y_max") config.grid.y_max = parse_number(at, value);
      else if (key == "y_step") config.grid.y_step = parse_number(at, value);
      else if (key == "z_tag") config.grid.z_tag = parse_number(at, value);
      else if (key == "rounds_per_cell") config.grid.rounds_per_cell = parse_integer(at, value);
      else if (key == "metric") {
        if (value == "norms") config.grid_options.metric = ErrorMetric::MeanOfNorms;
        else if (value == "offset") config.grid_options.metric = ErrorMetric::NormOfMeanOffset;
        else at.fail("grid metric must be norms or offset");
      } else if (key == "error_3d") {
        config.grid_options.error_3d = parse_bool(at, value);
      } else at.fail("unknown [grid] key `" + key + "`");
    } else {
      at.fail("unknown section [" + section + "]");
    }
  }

  for (auto& [id, profile] : config.channel_overrides) {
    profile = config.channel;
  }
  for (const auto& ov : channel_override_keys) {
    set_channel_key(ov.at, config.channel_overrides.at(ov.id), ov.key, ov.value);
  }

  if (!config.channel.valid()) {
    throw ConfigError(origin + ": invalid [channel] parameters");
  }
  for (const auto& [id, profile] : config.channel_overrides) {
    if (!profile.valid()) {
      throw ConfigError(origin + ": invalid channel override for " + format_anchor_id(id));
    }
  }
  if (!config.ekf.valid()) {
    throw ConfigError(origin + ": [ekf] parameters must be strictly positive");
  }
  if (!config.tag_clock.plausible()) {
    throw ConfigError(origin + ": tag clock drift out of the +-100 ppm range");
  }
  for (const auto& [id, clock] : config.anchor_clocks) {
    if (!clock.plausible()) {
      throw ConfigError(origin + ": clock for " + format_anchor_id(id) + " out of range");
    }
  }
  config.grid_options.ekf_mode = config.ekf_mode;
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open scenario file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ScenarioConfig config = parse_scenario(buffer.str(), path.string());
  // relative anchor paths are relative to the scenario file, not the cwd
  if (!config.anchor_file.empty() && config.anchor_file.is_relative()) {
    config.anchor_file = path.parent_path() / config.anchor_file;
  }
  return config;
}

AnchorTable ScenarioConfig::resolve_anchors() const {
  if (anchor_file.empty()) {
    throw ConfigError("no anchor_file configured");
  }
  return load_anchor_table(anchor_file);
}

Schedule ScenarioConfig::effective_schedule(const AnchorTable& table) const {
  Schedule result = schedule;
  if (result.anchors.empty()) {
    for (const auto& [id, pos] : table.entries) {
      result.anchors.push_back(id);
    }
  }
  result.validate();
  for (AnchorId id : result.anchors) {
    if (!table.contains(id)) {
      throw ConfigError("scheduled anchor " + format_anchor_id(id) +
                        " is missing from the anchor table");
    }
  }
  return result;
}

RangingScenario ScenarioConfig::make_scenario(const AnchorTable& table) const {
  RangingScenario scenario;
  scenario.tag_pos = tag_pos;
  scenario.anchors = table;
  scenario.tag_clock = tag_clock;
  scenario.anchor_clocks = anchor_clocks;
  scenario.default_channel = channel;
  scenario.channel_overrides = channel_overrides;
  scenario.reply_time = reply_time;
  return scenario;
}

}  // namespace uwbsim
