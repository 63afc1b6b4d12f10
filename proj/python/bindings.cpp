#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "uwbsim/anchor_table.hpp"
#include "uwbsim/channel.hpp"
#include "uwbsim/clock.hpp"
#include "uwbsim/ekf.hpp"
#include "uwbsim/errors.hpp"
#include "uwbsim/eval.hpp"
#include "uwbsim/geometry.hpp"
#include "uwbsim/multilateration.hpp"
#include "uwbsim/rng.hpp"
#include "uwbsim/scenario.hpp"
#include "uwbsim/schedule.hpp"
#include "uwbsim/twr.hpp"

namespace py = pybind11;
using namespace uwbsim;

namespace {

std::string point_repr(const Point3& p) {
  std::ostringstream out;
  out << "Point3(" << p.x << ", " << p.y << ", " << p.z << ")";
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulation-backed UWB two-way-ranging and localization toolkit";

  m.attr("SPEED_OF_LIGHT") = constants::speed_of_light;

  py::register_exception<SimError>(m, "SimError");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<GeometryError>(m, "GeometryError");
  py::register_exception<NoFixError>(m, "NoFixError");

  py::class_<Point3>(m, "Point3")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"))
      .def_readwrite("x", &Point3::x)
      .def_readwrite("y", &Point3::y)
      .def_readwrite("z", &Point3::z)
      .def("__repr__", &point_repr)
      .def("__eq__", [](const Point3& a, const Point3& b) { return a == b; });

  py::class_<AnchorId>(m, "AnchorId")
      .def(py::init([](unsigned value) {
        if (value > 0xff) throw py::value_error("anchor id must fit in a byte");
        return AnchorId{static_cast<std::uint8_t>(value)};
      }))
      .def_property_readonly("value", [](AnchorId id) { return id.value; })
      .def("__int__", [](AnchorId id) { return static_cast<int>(id.value); })
      .def("__repr__", [](AnchorId id) { return format_anchor_id(id); })
      .def("__eq__", [](AnchorId a, AnchorId b) { return a == b; })
      .def("__lt__", [](AnchorId a, AnchorId b) { return a < b; })
      .def("__hash__", [](AnchorId id) { return static_cast<std::size_t>(id.value); });
  py::implicitly_convertible<py::int_, AnchorId>();

  m.def("euclidean_distance", &euclidean_distance, py::arg("a"), py::arg("b"));

  py::class_<RngStream>(m, "RngStream")
      .def_static(
          "derive",
          [](RngSeed seed, const std::vector<std::uint64_t>& keys) {
            return RngStream::derive(seed, keys);
          },
          py::arg("seed"), py::arg("keys") = std::vector<std::uint64_t>{})
      .def("next_u64", &RngStream::next_u64)
      .def("next_unit", &RngStream::next_unit)
      .def("next_gaussian", &RngStream::next_gaussian);

  py::class_<DeviceClock>(m, "DeviceClock")
      .def(py::init([](double offset_ps, double drift_ppm, double tick_ps) {
             return DeviceClock{offset_ps, drift_ppm, tick_ps};
           }),
           py::arg("offset_ps") = 0.0, py::arg("drift_ppm") = 0.0, py::arg("tick_ps") = 1.0)
      .def_readwrite("offset_ps", &DeviceClock::offset_ps)
      .def_readwrite("drift_ppm", &DeviceClock::drift_ppm)
      .def_readwrite("tick_ps", &DeviceClock::tick_ps)
      .def("read", &DeviceClock::read, py::arg("t_global_ps"));

  py::class_<ChannelProfile>(m, "ChannelProfile")
      .def(py::init<>())
      .def_static("default_los", &ChannelProfile::default_los)
      .def_readwrite("noise_sigma", &ChannelProfile::noise_sigma)
      .def_readwrite("nlos_bias", &ChannelProfile::nlos_bias)
      .def_readwrite("nlos", &ChannelProfile::nlos)
      .def_readwrite("outlier_prob", &ChannelProfile::outlier_prob)
      .def_readwrite("outlier_extra", &ChannelProfile::outlier_extra)
      .def_readwrite("loss_prob", &ChannelProfile::loss_prob)
      .def_readwrite("per_message", &ChannelProfile::per_message);

  m.def(
      "perturb_path",
      [](double true_distance, const ChannelProfile& profile, RngStream& rng)
          -> std::optional<double> { return perturb_path(true_distance, profile, rng); },
      py::arg("true_distance"), py::arg("profile"), py::arg("rng"),
      "Perturbed one-way path length, or None when the packet is lost");

  py::class_<TwrExchange>(m, "TwrExchange")
      .def(py::init<>())
      .def_readwrite("t_send_poll", &TwrExchange::t_send_poll)
      .def_readwrite("t_receive_poll", &TwrExchange::t_receive_poll)
      .def_readwrite("t_send_response", &TwrExchange::t_send_response)
      .def_readwrite("t_receive_response", &TwrExchange::t_receive_response)
      .def_readwrite("anchor", &TwrExchange::anchor)
      .def_readwrite("tick_ps", &TwrExchange::tick_ps);

  py::enum_<RangeMeasurement::Status>(m, "MeasurementStatus")
      .value("Ok", RangeMeasurement::Status::Ok)
      .value("Lost", RangeMeasurement::Status::Lost)
      .value("NegativeTof", RangeMeasurement::Status::NegativeTof)
      .value("Implausible", RangeMeasurement::Status::Implausible);

  py::class_<RangeMeasurement>(m, "RangeMeasurement")
      .def(py::init<>())
      .def_readwrite("anchor", &RangeMeasurement::anchor)
      .def_readwrite("distance_m", &RangeMeasurement::distance_m)
      .def_readwrite("sim_time", &RangeMeasurement::sim_time)
      .def_readwrite("valid", &RangeMeasurement::valid)
      .def_readwrite("status", &RangeMeasurement::status);

  m.def("compute_tof", &compute_tof, py::arg("exchange"),
        "TOF in picoseconds from the four handshake timestamps");
  m.def("tof_to_distance", &tof_to_distance, py::arg("tof_ps"));
  m.def("run_exchange", &run_exchange, py::arg("tag_pos"), py::arg("anchor_pos"),
        py::arg("tag_clock"), py::arg("anchor_clock"), py::arg("reply_time"),
        py::arg("channel"), py::arg("t_start"), py::arg("anchor"), py::arg("rng"),
        "Forward-simulate one handshake; None when the channel drops a message");
  m.def("make_measurement", &make_measurement, py::arg("exchange"), py::arg("anchor"),
        py::arg("t_poll"), py::arg("tag_clock"));

  py::class_<AnchorTable>(m, "AnchorTable")
      .def(py::init<>())
      .def_readwrite("entries", &AnchorTable::entries)
      .def_readwrite("version", &AnchorTable::version)
      .def("set", &AnchorTable::set, py::arg("id"), py::arg("position"))
      .def("remove", &AnchorTable::remove, py::arg("id"))
      .def("__len__", [](const AnchorTable& t) { return t.size(); })
      .def("__contains__", [](const AnchorTable& t, AnchorId id) { return t.contains(id); });

  m.def("load_anchor_table", &load_anchor_table, py::arg("path"));
  m.def("store_anchor_table", &store_anchor_table, py::arg("table"), py::arg("path"));
  m.def("format_anchor_table", &format_anchor_table, py::arg("table"));
  m.def("apply_command", &apply_command, py::arg("table"), py::arg("command_line"),
        "Apply one SET/GET/LIST/DEL provisioning command; returns the reply text");
  m.def("format_anchor_id", &format_anchor_id, py::arg("id"));

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<>())
      .def_readwrite("slot_ms", &Schedule::slot_ms)
      .def_readwrite("anchors", &Schedule::anchors)
      .def("slot_ps", &Schedule::slot_ps)
      .def("round_trip_ps", &Schedule::round_trip_ps)
      .def("validate", &Schedule::validate);

  py::class_<RangingScenario>(m, "RangingScenario")
      .def(py::init<>())
      .def_readwrite("tag_pos", &RangingScenario::tag_pos)
      .def_readwrite("anchors", &RangingScenario::anchors)
      .def_readwrite("tag_clock", &RangingScenario::tag_clock)
      .def_readwrite("anchor_clocks", &RangingScenario::anchor_clocks)
      .def_readwrite("default_channel", &RangingScenario::default_channel)
      .def_readwrite("channel_overrides", &RangingScenario::channel_overrides)
      .def_readwrite("reply_time", &RangingScenario::reply_time);

  py::class_<RoundResult>(m, "RoundResult")
      .def_readonly("round_index", &RoundResult::round_index)
      .def_readonly("measurements", &RoundResult::measurements)
      .def_readonly("t_round_start", &RoundResult::t_round_start)
      .def_readonly("t_round_end", &RoundResult::t_round_end);

  py::class_<Session>(m, "Session")
      .def(py::init<Schedule, RangingScenario, RngSeed, std::uint64_t, Picoseconds>(),
           py::arg("schedule"), py::arg("scenario"), py::arg("seed"),
           py::arg("stream_key") = 0, py::arg("t_start") = 0)
      .def("run_round", &Session::run_round)
      .def("run_session", &Session::run_session, py::arg("n_rounds"))
      .def("now", &Session::now);

  py::class_<EkfParams>(m, "EkfParams")
      .def(py::init<>())
      .def_readwrite("q_accel", &EkfParams::q_accel)
      .def_readwrite("r_range", &EkfParams::r_range)
      .def_readwrite("p0_pos", &EkfParams::p0_pos)
      .def_readwrite("p0_vel", &EkfParams::p0_vel)
      .def_readwrite("dt", &EkfParams::dt)
      .def_readwrite("gate_sigma", &EkfParams::gate_sigma)
      .def("initial_state", &EkfParams::initial_state, py::arg("position"));

  py::class_<EkfState>(m, "EkfState")
      .def(py::init<>())
      .def_readwrite("x", &EkfState::x)
      .def_readwrite("P", &EkfState::P)
      .def("position", &EkfState::position)
      .def("velocity", &EkfState::velocity)
      .def("covariance_healthy", &EkfState::covariance_healthy);

  m.def("predict", &predict, py::arg("state"), py::arg("dt"), py::arg("params"));
  m.def("predicted_ranges", &predicted_ranges, py::arg("position"), py::arg("anchors"));
  m.def("measurement_jacobian", &measurement_jacobian, py::arg("position"),
        py::arg("anchors"), "Rows are range gradients w.r.t. the 6-D state");

  py::enum_<RangeDisposition>(m, "RangeDisposition")
      .value("Accepted", RangeDisposition::Accepted)
      .value("Invalid", RangeDisposition::Invalid)
      .value("Gated", RangeDisposition::Gated)
      .value("Singular", RangeDisposition::Singular)
      .value("Unknown", RangeDisposition::Unknown);

  py::class_<InnovationRecord>(m, "InnovationRecord")
      .def_readonly("anchor", &InnovationRecord::anchor)
      .def_readonly("predicted_m", &InnovationRecord::predicted_m)
      .def_readonly("measured_m", &InnovationRecord::measured_m)
      .def_readonly("innovation_m", &InnovationRecord::innovation_m)
      .def_readonly("disposition", &InnovationRecord::disposition);

  py::class_<UpdateReport>(m, "UpdateReport")
      .def_readonly("records", &UpdateReport::records)
      .def_readonly("accepted", &UpdateReport::accepted)
      .def_readonly("rejected", &UpdateReport::rejected);

  py::enum_<UpdateMode>(m, "UpdateMode")
      .value("Sequential", UpdateMode::Sequential)
      .value("Batch", UpdateMode::Batch);

  m.def("update", &update, py::arg("state"), py::arg("measurements"), py::arg("anchors"),
        py::arg("params"), py::arg("mode") = UpdateMode::Sequential,
        "Range update; returns (state, report)");

  py::class_<EkfLocalizer>(m, "EkfLocalizer")
      .def(py::init<std::map<AnchorId, Point3>, EkfParams, UpdateMode>(), py::arg("anchors"),
           py::arg("params") = EkfParams{}, py::arg("mode") = UpdateMode::Sequential)
      .def("process_round", &EkfLocalizer::process_round, py::arg("round"))
      .def("initialized", &EkfLocalizer::initialized)
      .def("state", &EkfLocalizer::state, py::return_value_policy::copy);

  py::class_<MultilaterationResult>(m, "MultilaterationResult")
      .def_readonly("position", &MultilaterationResult::position)
      .def_readonly("residual_rms", &MultilaterationResult::residual_rms)
      .def_readonly("iterations", &MultilaterationResult::iterations);

  m.def(
      "solve_multilateration",
      [](const std::vector<std::pair<Point3, double>>& ranges) {
        return solve_multilateration(ranges);
      },
      py::arg("ranges"), "Gauss-Newton least-squares position from (anchor, range) pairs");
  m.def("check_anchor_span", &check_anchor_span, py::arg("anchors"));

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("x_min", &GridSpec::x_min)
      .def_readwrite("x_max", &GridSpec::x_max)
      .def_readwrite("x_step", &GridSpec::x_step)
      .def_readwrite("y_min", &GridSpec::y_min)
      .def_readwrite("y_max", &GridSpec::y_max)
      .def_readwrite("y_step", &GridSpec::y_step)
      .def_readwrite("z_tag", &GridSpec::z_tag)
      .def_readwrite("rounds_per_cell", &GridSpec::rounds_per_cell)
      .def("intersections", &GridSpec::intersections);

  py::class_<CellStats>(m, "CellStats")
      .def_readonly("true_pos", &CellStats::true_pos)
      .def_readonly("mean_error_cm", &CellStats::mean_error_cm)
      .def_readonly("error_std_cm", &CellStats::error_std_cm)
      .def_readonly("sample_mean", &CellStats::sample_mean)
      .def_readonly("cov2d", &CellStats::cov2d)
      .def_readonly("n", &CellStats::n);

  py::class_<FixRecord>(m, "FixRecord")
      .def_readonly("cell_x", &FixRecord::cell_x)
      .def_readonly("cell_y", &FixRecord::cell_y)
      .def_readonly("round", &FixRecord::round)
      .def_readonly("estimate", &FixRecord::estimate);

  py::class_<ConfidenceEllipse>(m, "ConfidenceEllipse")
      .def_readonly("center_x", &ConfidenceEllipse::center_x)
      .def_readonly("center_y", &ConfidenceEllipse::center_y)
      .def_readonly("semi_major", &ConfidenceEllipse::semi_major)
      .def_readonly("semi_minor", &ConfidenceEllipse::semi_minor)
      .def_readonly("orientation_rad", &ConfidenceEllipse::orientation_rad);

  py::enum_<ErrorMetric>(m, "ErrorMetric")
      .value("MeanOfNorms", ErrorMetric::MeanOfNorms)
      .value("NormOfMeanOffset", ErrorMetric::NormOfMeanOffset);

  py::class_<GridOptions>(m, "GridOptions")
      .def(py::init<>())
      .def_readwrite("metric", &GridOptions::metric)
      .def_readwrite("error_3d", &GridOptions::error_3d)
      .def_readwrite("ekf_mode", &GridOptions::ekf_mode);

  py::class_<GridResult>(m, "GridResult")
      .def_readonly("cells", &GridResult::cells)
      .def_readonly("fixes", &GridResult::fixes);

  m.def("run_grid", &run_grid, py::arg("grid"), py::arg("anchors"), py::arg("scenario"),
        py::arg("schedule"), py::arg("ekf_params"), py::arg("seed"),
        py::arg("options") = GridOptions{},
        "Static grid evaluation: fresh filter per cell, statistics per cell");
  m.def("error_stats", &error_stats, py::arg("fixes"), py::arg("truth"),
        "(mean, std) of 2-D error norms, in centimeters");
  m.def("confidence_ellipse", &confidence_ellipse, py::arg("cov2d"), py::arg("center"),
        py::arg("k"));
  m.def("ellipse_contains", &ellipse_contains, py::arg("cov2d"), py::arg("center"),
        py::arg("k"), py::arg("point"));
  m.def("emit_reports", &emit_reports, py::arg("result"), py::arg("out_dir"));

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("anchor_file", &ScenarioConfig::anchor_file)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("tag_pos", &ScenarioConfig::tag_pos)
      .def_readwrite("schedule", &ScenarioConfig::schedule)
      .def_readwrite("channel", &ScenarioConfig::channel)
      .def_readwrite("ekf", &ScenarioConfig::ekf)
      .def_readwrite("grid", &ScenarioConfig::grid)
      .def("resolve_anchors", &ScenarioConfig::resolve_anchors)
      .def("effective_schedule", &ScenarioConfig::effective_schedule, py::arg("table"))
      .def("make_scenario", &ScenarioConfig::make_scenario, py::arg("table"));

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("origin") = "<memory>");

#ifdef UWBSIM_VERSION
  m.attr("__version__") = UWBSIM_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
