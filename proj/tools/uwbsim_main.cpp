#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "uwbsim/detail/format.hpp"
#include "uwbsim/ekf.hpp"
#include "uwbsim/errors.hpp"
#include "uwbsim/eval.hpp"
#include "uwbsim/multilateration.hpp"
#include "uwbsim/scenario.hpp"
#include "uwbsim/schedule.hpp"

namespace {

using namespace uwbsim;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
  std::string config_file;
  std::string anchors_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> slot_ms;
  std::optional<std::string> tag;
  std::int64_t rounds = 500;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_rounds = true) {
  cmd->add_option("--config", flags.config_file, "scenario file");
  cmd->add_option("--anchors", flags.anchors_file, "anchor table file (overrides scenario)");
  cmd->add_option("--seed", flags.seed, "simulation seed (overrides scenario)");
  cmd->add_option("--slot-ms", flags.slot_ms, "ranging slot duration in ms");
  cmd->add_option("--tag", flags.tag, "true tag position as x,y,z");
  if (with_rounds) {
    cmd->add_option("--rounds", flags.rounds, "number of polling rounds")
        ->check(CLI::PositiveNumber);
  }
}

Point3 parse_tag(const std::string& text) {
  std::string normalized = text;
  for (char& c : normalized) {
    if (c == ',') c = ' ';
  }
  Point3 p;
  std::istringstream in(normalized);
  std::string rest;
  if (!(in >> p.x >> p.y >> p.z) || (in >> rest)) {
    throw ConfigError("--tag expects x,y,z");
  }
  return p;
}

ScenarioConfig resolve_config(const CommonFlags& flags) {
  ScenarioConfig config;
  if (!flags.config_file.empty()) {
    config = load_scenario(flags.config_file);
  }
  if (!flags.anchors_file.empty()) {
    config.anchor_file = flags.anchors_file;
  }
  if (flags.seed) {
    config.seed = *flags.seed;
  }
  if (flags.slot_ms) {
    config.schedule.slot_ms = *flags.slot_ms;
  }
  if (flags.tag) {
    config.tag_pos = parse_tag(*flags.tag);
  }
  return config;
}

std::string fmt(double v) { return detail::format_double(v); }

int cmd_range(const CommonFlags& flags) {
  const ScenarioConfig config = resolve_config(flags);
  const AnchorTable table = config.resolve_anchors();
  const Schedule schedule = config.effective_schedule(table);
  Session session(schedule, config.make_scenario(table), config.seed);

  std::string out = "round,sim_time_ps,anchor,distance_m,valid\n";
  for (std::int64_t r = 0; r < flags.rounds; ++r) {
    const RoundResult round = session.run_round();
    for (const RangeMeasurement& m : round.measurements) {
      out += std::to_string(round.round_index) + "," + std::to_string(m.sim_time) + "," +
             format_anchor_id(m.anchor) + ",";
      out += (m.status == RangeMeasurement::Status::Lost) ? "nan" : fmt(m.distance_m);
      out += m.valid ? ",1\n" : ",0\n";
    }
  }
  std::fputs(out.c_str(), stdout);
  return kExitOk;
}

int cmd_localize(const CommonFlags& flags) {
  const ScenarioConfig config = resolve_config(flags);
  const AnchorTable table = config.resolve_anchors();
  const Schedule schedule = config.effective_schedule(table);

  std::vector<Point3> anchor_positions;
  for (AnchorId id : schedule.anchors) {
    anchor_positions.push_back(table.entries.at(id));
  }
  check_anchor_span(anchor_positions);  // fail before the run starts

  Session session(schedule, config.make_scenario(table), config.seed);
  EkfLocalizer localizer(table.entries, config.ekf, config.ekf_mode);

  std::string out =
      "round,sim_time_ps,x,y,z,p_xx,p_yy,p_zz,n_accepted,n_rejected,innovations\n";
  for (std::int64_t r = 0; r < flags.rounds; ++r) {
    const RoundResult round = session.run_round();
    const UpdateReport report = localizer.process_round(round);
    out += std::to_string(round.round_index) + "," + std::to_string(round.t_round_end) + ",";
    if (localizer.initialized()) {
      const EkfState& s = localizer.state();
      std::string innovations;
      for (const InnovationRecord& rec : report.records) {
        if (!innovations.empty()) innovations += ';';
        innovations += format_anchor_id(rec.anchor) + ":";
        switch (rec.disposition) {
          case RangeDisposition::Accepted:
            innovations += fmt(rec.innovation_m);
            break;
          case RangeDisposition::Gated:
            innovations += "gated(" + fmt(rec.innovation_m) + ")";
            break;
          case RangeDisposition::Invalid:
            innovations += "lost";
            break;
          case RangeDisposition::Singular:
            innovations += "singular";
            break;
          case RangeDisposition::Unknown:
            innovations += "unknown";
            break;
        }
      }
      out += fmt(s.x(0)) + "," + fmt(s.x(1)) + "," + fmt(s.x(2)) + "," + fmt(s.P(0, 0)) + "," +
             fmt(s.P(1, 1)) + "," + fmt(s.P(2, 2)) + "," + std::to_string(report.accepted) +
             "," + std::to_string(report.rejected) + "," + innovations + "\n";
    } else {
      out += "nan,nan,nan,nan,nan,nan,0,0,\n";
    }
  }
  std::fputs(out.c_str(), stdout);
  return kExitOk;
}

int cmd_grid_eval(const CommonFlags& flags, const std::string& out_dir) {
  const ScenarioConfig config = resolve_config(flags);
  const AnchorTable table = config.resolve_anchors();
  const Schedule schedule = config.effective_schedule(table);

  std::vector<Point3> anchor_positions;
  for (AnchorId id : schedule.anchors) {
    anchor_positions.push_back(table.entries.at(id));
  }
  check_anchor_span(anchor_positions);

  const GridResult result = run_grid(config.grid, table, config.make_scenario(table), schedule,
                                     config.ekf, config.seed, config.grid_options);
  emit_reports(result, out_dir);
  return kExitOk;
}

int cmd_config(const std::string& anchors_file, const std::string& command) {
  AnchorTable table;
  const bool is_mutation =
      command.rfind("SET", 0) == 0 || command.rfind("DEL", 0) == 0;
  try {
    table = load_anchor_table(anchors_file);
  } catch (const NotProvisionedError&) {
    // SET provisions a fresh store; queries on a missing store stay an error.
    if (!(command.rfind("SET", 0) == 0)) throw;
  }

  const std::string reply = apply_command(table, command);
  std::fputs(reply.c_str(), stdout);
  std::fputc('\n', stdout);
  if (reply.rfind("ERR", 0) == 0) {
    return kExitConfig;
  }
  if (is_mutation) {
    store_anchor_table(table, anchors_file);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation-backed UWB two-way-ranging and localization toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;

  CLI::App* range = app.add_subcommand("range", "stream raw range measurements as CSV");
  add_common(range, flags);

  CLI::App* localize = app.add_subcommand("localize", "stream filtered position fixes as CSV");
  add_common(localize, flags);

  std::string out_dir;
  CLI::App* grid = app.add_subcommand("grid-eval", "run the static grid evaluation protocol");
  add_common(grid, flags, false);
  grid->add_option("--out", out_dir, "output directory for cells/fixes/ellipses CSV")
      ->required();

  std::string config_command;
  std::string config_anchors;
  CLI::App* config = app.add_subcommand("config", "apply one provisioning command");
  config->add_option("--anchors", config_anchors, "anchor table file")->required();
  config->add_option("command", config_command, "SET/GET/LIST/DEL command line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e);
    }
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (range->parsed()) return cmd_range(flags);
    if (localize->parsed()) return cmd_localize(flags);
    if (grid->parsed()) return cmd_grid_eval(flags, out_dir);
    if (config->parsed()) return cmd_config(config_anchors, config_command);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
