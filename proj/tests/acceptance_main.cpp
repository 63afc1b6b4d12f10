// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run via ctest (`ctest -R acceptance`) or directly.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "uwbsim/anchor_table.hpp"
#include "uwbsim/ekf.hpp"
#include "uwbsim/errors.hpp"
#include "uwbsim/eval.hpp"
#include "uwbsim/multilateration.hpp"
#include "uwbsim/rng.hpp"
#include "uwbsim/schedule.hpp"
#include "uwbsim/twr.hpp"

using namespace uwbsim;
namespace fs = std::filesystem;

namespace {

struct Harness {
  int failures = 0;

  void run(int id, const std::string& name, const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

AnchorTable room_anchors() {
  AnchorTable table;
  table.entries[AnchorId{0x02}] = {0.81, 3.63, 3.01};
  table.entries[AnchorId{0x03}] = {0.81, 6.38, 3.01};
  table.entries[AnchorId{0x04}] = {6.31, 7.66, 2.83};
  table.entries[AnchorId{0x05}] = {6.72, 3.65, 2.64};
  table.entries[AnchorId{0x06}] = {2.77, 0.07, 0.91};
  return table;
}

Schedule room_schedule() {
  Schedule s;
  for (const auto& [id, pos] : room_anchors().entries) {
    s.anchors.push_back(id);
  }
  return s;
}

RangingScenario static_scenario(const Point3& tag, const ChannelProfile& channel) {
  RangingScenario scenario;
  scenario.tag_pos = tag;
  scenario.anchors = room_anchors();
  scenario.default_channel = channel;
  return scenario;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool criterion_round_timing(std::string& detail) {
  Schedule five = room_schedule();
  if (five.round_trip_ps() != ms_to_ps(250)) {
    detail = "5-anchor round is not 250 ms";
    return false;
  }
  Session session(five, static_scenario({4, 5, 1}, ChannelProfile{}), 1);
  const RoundResult round = session.run_round();
  if (round.t_round_end - round.t_round_start != ms_to_ps(250)) {
    detail = "executed round duration differs from 250 ms";
    return false;
  }
  for (int k = 1; k <= 10; ++k) {
    Schedule s;
    for (int i = 0; i < k; ++i) {
      s.anchors.push_back(AnchorId{static_cast<std::uint8_t>(i + 1)});
    }
    if (s.round_trip_ps() != static_cast<std::int64_t>(k) * ms_to_ps(50)) {
      detail = "round time not k * 50 ms at k=" + std::to_string(k);
      return false;
    }
  }
  detail = "round = anchors x 50 ms, exact";
  return true;
}

bool criterion_linear_regression(std::string& detail) {
  double sum_k = 0, sum_y = 0, sum_kk = 0, sum_ky = 0;
  const int n = 10;
  for (int k = 1; k <= n; ++k) {
    Schedule s;
    for (int i = 0; i < k; ++i) {
      s.anchors.push_back(AnchorId{static_cast<std::uint8_t>(i + 1)});
    }
    const double y_ms =
        static_cast<double>(s.round_trip_ps()) / static_cast<double>(ms_to_ps(1));
    sum_k += k;
    sum_y += y_ms;
    sum_kk += static_cast<double>(k) * k;
    sum_ky += static_cast<double>(k) * y_ms;
  }
  const double slope = (n * sum_ky - sum_k * sum_y) / (n * sum_kk - sum_k * sum_k);
  const double intercept = (sum_y - slope * sum_k) / n;
  detail = "slope " + std::to_string(slope) + " ms/anchor, intercept " +
           std::to_string(intercept) + " ms";
  return slope == 50.0 && intercept == 0.0;
}

bool criterion_twr_inversion(std::string& detail) {
  RngStream rng = RngStream::derive(2024, {1});
  ChannelProfile ideal;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Point3 tag{rng.next_unit() * 10.0, rng.next_unit() * 8.0, rng.next_unit() * 3.0};
    const Point3 anchor{rng.next_unit() * 10.0, rng.next_unit() * 8.0, rng.next_unit() * 3.0};
    auto ex = run_exchange(tag, anchor, DeviceClock{}, DeviceClock{}, ms_to_ps(1), ideal, 0,
                           AnchorId{0x02}, rng);
    if (!ex) {
      detail = "ideal channel lost an exchange";
      return false;
    }
    const double err =
        std::abs(tof_to_distance(compute_tof(*ex)) - euclidean_distance(tag, anchor));
    worst = std::max(worst, err);
  }
  detail = "worst inversion error " + std::to_string(worst * 1000.0) + " mm";
  return worst < 0.5e-3;
}

bool criterion_drift_bias(std::string& detail) {
  ChannelProfile ideal;
  const double tolerance = 1e-12 * constants::speed_of_light;  // 1 ps of light travel
  double worst = 0.0;
  for (double ppm : {-50.0, -10.0, 10.0, 50.0}) {
    for (Picoseconds reply : {Picoseconds{200'000'000}, Picoseconds{1'000'000'000},
                              Picoseconds{5'000'000'000}}) {
      RngStream rng = RngStream::derive(7, {static_cast<std::uint64_t>(ppm + 100),
                                            static_cast<std::uint64_t>(reply)});
      DeviceClock tag_clock{.drift_ppm = ppm};
      auto ex = run_exchange({2, 2, 1}, {2, 2, 1}, tag_clock, DeviceClock{}, reply, ideal, 0,
                             AnchorId{0x02}, rng);
      if (!ex) return false;
      const double bias_m = tof_to_distance(compute_tof(*ex));  // true distance is zero
      const double expected_m =
          ppm * 1e-6 * static_cast<double>(reply) * 1e-12 * constants::speed_of_light / 2.0;
      worst = std::max(worst, std::abs(bias_m - expected_m));
    }
  }
  detail = "worst deviation from the bias law " + std::to_string(worst * 1e6) + " um";
  return worst < tolerance;
}

bool criterion_jacobian_fd(std::string& detail) {
  RngStream rng = RngStream::derive(2025, {2});
  const double step = 1e-5;
  double max_rel = 0.0;
  for (int sample = 0; sample < 100; ++sample) {
    const Point3 tag{rng.next_unit() * 10.0, rng.next_unit() * 8.0, rng.next_unit() * 3.0};
    std::vector<Point3> anchors;
    while (anchors.size() < 5) {
      Point3 p{rng.next_unit() * 10.0, rng.next_unit() * 8.0, rng.next_unit() * 3.0};
      if (euclidean_distance(p, tag) > 0.2) anchors.push_back(p);
    }
    const auto jac = measurement_jacobian(tag, anchors);
    for (int axis = 0; axis < 3; ++axis) {
      Point3 plus = tag, minus = tag;
      (axis == 0 ? plus.x : axis == 1 ? plus.y : plus.z) += step;
      (axis == 0 ? minus.x : axis == 1 ? minus.y : minus.z) -= step;
      const auto rp = predicted_ranges(plus, anchors);
      const auto rm = predicted_ranges(minus, anchors);
      for (std::size_t i = 0; i < anchors.size(); ++i) {
        const double fd = (rp[i] - rm[i]) / (2.0 * step);
        const double an = jac(static_cast<Eigen::Index>(i), axis);
        // rows are unit-norm, so the absolute difference is already relative
        max_rel = std::max(max_rel, std::abs(fd - an) / std::max(std::abs(an), 1e-3));
      }
    }
  }
  detail = "max relative error " + std::to_string(max_rel);
  return max_rel < 1e-6;
}

bool criterion_ekf_convergence(std::string& detail) {
  const Point3 truth{4, 5, 1};
  Session session(room_schedule(), static_scenario(truth, ChannelProfile{}), 11);
  EkfLocalizer localizer(room_anchors().entries, EkfParams{});
  for (int r = 0; r < 20; ++r) {
    localizer.process_round(session.run_round());
  }
  if (!localizer.initialized()) {
    detail = "filter never initialized";
    return false;
  }
  const double err = euclidean_distance(localizer.state().position(), truth);

  std::vector<std::pair<Point3, double>> ranges;
  for (const auto& [id, pos] : room_anchors().entries) {
    ranges.emplace_back(pos, euclidean_distance(truth, pos));
  }
  const Point3 oracle = solve_multilateration(ranges).position;
  const double vs_oracle = euclidean_distance(localizer.state().position(), oracle);

  detail = "error " + std::to_string(err * 100.0) + " cm, vs oracle " +
           std::to_string(vs_oracle * 1000.0) + " mm";
  return err < 0.01 && vs_oracle < 1e-3;
}

bool criterion_precision_band(std::string& detail) {
  GridSpec grid;
  grid.x_min = grid.x_max = 4.0;
  grid.y_min = grid.y_max = 5.0;
  grid.rounds_per_cell = 500;
  const auto result = run_grid(grid, room_anchors(),
                               static_scenario({4, 5, 1}, ChannelProfile::default_los()),
                               room_schedule(), EkfParams{}, 2026);
  if (result.cells.size() != 1 || result.cells[0].n < 400) {
    detail = "cell did not produce enough fixes";
    return false;
  }
  const double sigma = result.cells[0].error_std_cm;
  detail = "error_std " + std::to_string(sigma) + " cm (band [2, 7])";
  return sigma > 2.0 && sigma < 7.0;
}

bool criterion_nlos_overestimation(std::string& detail) {
  const std::vector<std::pair<double, double>> cells = {
      {2, 2}, {3, 3}, {4, 5}, {5, 7}, {6, 4}};
  const RngSeed seed = 31337;

  ChannelProfile nlos_profile = ChannelProfile::default_los();
  nlos_profile.nlos = true;
  nlos_profile.nlos_bias = 0.4;

  for (const auto& [cx, cy] : cells) {
    GridSpec grid;
    grid.x_min = grid.x_max = cx;
    grid.y_min = grid.y_max = cy;
    grid.rounds_per_cell = 500;

    RangingScenario los = static_scenario({cx, cy, 1}, ChannelProfile::default_los());
    RangingScenario nlos = los;
    nlos.channel_overrides[AnchorId{0x02}] = nlos_profile;
    nlos.channel_overrides[AnchorId{0x05}] = nlos_profile;

    const auto base =
        run_grid(grid, room_anchors(), los, room_schedule(), EkfParams{}, seed);
    const auto biased =
        run_grid(grid, room_anchors(), nlos, room_schedule(), EkfParams{}, seed);
    if (base.cells[0].n == 0 || biased.cells[0].n == 0) {
      detail = "empty cell";
      return false;
    }
    if (!(biased.cells[0].mean_error_cm > base.cells[0].mean_error_cm)) {
      detail = "no strict increase at (" + std::to_string(cx) + ", " + std::to_string(cy) +
               "): " + std::to_string(base.cells[0].mean_error_cm) + " vs " +
               std::to_string(biased.cells[0].mean_error_cm) + " cm";
      return false;
    }
  }
  detail = "mean 2-D error strictly higher with two NLOS links at all 5 cells";
  return true;
}

bool criterion_ellipse_containment(std::string& detail) {
  RngStream rng = RngStream::derive(777, {1});
  Eigen::Matrix2d cov;
  cov << 4.0, 1.2, 1.2, 2.0;
  const Eigen::Matrix2d l = Eigen::LLT<Eigen::Matrix2d>(cov).matrixL();

  const int n = 100000;
  std::vector<std::pair<double, double>> samples;
  samples.reserve(n);
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d s = l * Eigen::Vector2d(rng.next_gaussian(), rng.next_gaussian());
    samples.emplace_back(s(0), s(1));
    mx += s(0);
    my += s(1);
  }
  mx /= n;
  my /= n;
  Eigen::Matrix2d sample_cov = Eigen::Matrix2d::Zero();
  for (const auto& [x, y] : samples) {
    sample_cov(0, 0) += (x - mx) * (x - mx);
    sample_cov(0, 1) += (x - mx) * (y - my);
    sample_cov(1, 1) += (y - my) * (y - my);
  }
  sample_cov(1, 0) = sample_cov(0, 1);
  sample_cov /= (n - 1.0);

  // the 3-sigma ellipse itself must be well-formed
  (void)confidence_ellipse(sample_cov, {mx, my}, 3.0);

  int inside = 0;
  for (const auto& s : samples) {
    if (ellipse_contains(sample_cov, {mx, my}, 3.0, s)) ++inside;
  }
  const double fraction = static_cast<double>(inside) / n;
  // chi-square(2): 1 - exp(-9/2) = 0.98889, not the 1-D 99.7% figure
  detail = "containment " + std::to_string(fraction) + " (expected 0.989 +- 0.005)";
  return std::abs(fraction - 0.98889) <= 0.005;
}

bool criterion_persistence(std::string& detail, const fs::path& data_dir,
                           const fs::path& out_dir) {
  const AnchorTable fixture = load_anchor_table(data_dir / "anchors_room.txt");
  const AnchorTable expected = room_anchors();
  if (!(fixture.entries == expected.entries)) {
    detail = "fixture does not match the expected coordinates";
    return false;
  }

  fs::create_directories(out_dir);
  const fs::path path = out_dir / "roundtrip.txt";
  RngStream rng = RngStream::derive(99, {1});
  for (int i = 0; i < 1000; ++i) {
    AnchorTable table;
    const int n = 1 + static_cast<int>(rng.next_unit() * 10);
    for (int a = 0; a < n; ++a) {
      table.entries[AnchorId{static_cast<std::uint8_t>(rng.next_u64() % 256)}] = {
          rng.next_gaussian() * 20.0, rng.next_gaussian() * 20.0, rng.next_gaussian() * 20.0};
    }
    table.version = rng.next_u64() % 100000;
    store_anchor_table(table, path);
    const AnchorTable loaded = load_anchor_table(path);
    if (!(loaded == table)) {
      detail = "round-trip mismatch at table " + std::to_string(i);
      return false;
    }
    if (format_anchor_table(loaded) != format_anchor_table(table)) {
      detail = "serialized bytes differ at table " + std::to_string(i);
      return false;
    }
  }
  detail = "1000 randomized tables round-tripped bit-exactly";
  return true;
}

bool criterion_determinism(std::string& detail, const std::string& cli,
                           const fs::path& data_dir, const fs::path& out_dir) {
  fs::create_directories(out_dir);

  // in-process: same grid, same seed, twice
  GridSpec grid;
  grid.x_min = 3.0, grid.x_max = 4.0, grid.x_step = 1.0;
  grid.y_min = 5.0, grid.y_max = 6.0, grid.y_step = 1.0;
  grid.rounds_per_cell = 100;
  const RangingScenario scenario =
      static_scenario({4, 5, 1}, ChannelProfile::default_los());
  const auto a = run_grid(grid, room_anchors(), scenario, room_schedule(), EkfParams{}, 4242);
  const auto b = run_grid(grid, room_anchors(), scenario, room_schedule(), EkfParams{}, 4242);
  emit_reports(a, out_dir / "in_a");
  emit_reports(b, out_dir / "in_b");
  for (const char* name : {"cells.csv", "fixes.csv", "ellipses.csv"}) {
    if (read_file(out_dir / "in_a" / name) != read_file(out_dir / "in_b" / name)) {
      detail = std::string("in-process mismatch in ") + name;
      return false;
    }
  }

  if (cli.empty()) {
    detail = "in-process only (no CLI path given)";
    return true;
  }

  // end-to-end through the CLI
  const fs::path scenario_file = out_dir / "scenario.ini";
  {
    std::ofstream cfg(scenario_file);
    cfg << "[sim]\nseed = 4242\nanchor_file = " << (data_dir / "anchors_room.txt").string()
        << "\n[grid]\nx_min = 3\nx_max = 4\ny_min = 5\ny_max = 6\nrounds_per_cell = 100\n";
  }
  for (const char* run : {"cli_a", "cli_b"}) {
    const std::string cmdline = cli + " grid-eval --config " + scenario_file.string() +
                                " --out " + (out_dir / run).string();
    if (std::system(cmdline.c_str()) != 0) {
      detail = "CLI run failed";
      return false;
    }
  }
  for (const char* name : {"cells.csv", "fixes.csv", "ellipses.csv"}) {
    if (read_file(out_dir / "cli_a" / name) != read_file(out_dir / "cli_b" / name)) {
      detail = std::string("CLI output mismatch in ") + name;
      return false;
    }
  }
  detail = "byte-identical CSVs, in-process and through the CLI";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path out_dir = fs::temp_directory_path() / "uwbsim_acceptance";
  fs::path data_dir = UWBSIM_DATA_DIR;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") cli = argv[i + 1];
    if (flag == "--out") out_dir = argv[i + 1];
    if (flag == "--data") data_dir = argv[i + 1];
  }

  Harness h;
  h.run(1, "round-trip timing: 5 anchors x 50 ms = 250 ms, k anchors = k x 50 ms",
        criterion_round_timing);
  h.run(2, "linear scaling: regression slope 50 ms/anchor, intercept 0",
        criterion_linear_regression);
  h.run(3, "TWR inversion within 0.5 mm over 1000 random geometries", criterion_twr_inversion);
  h.run(4, "drift bias equals drift * reply / 2 * c within 1 ps * c", criterion_drift_bias);
  h.run(5, "range jacobian matches central differences to 1e-6", criterion_jacobian_fd);
  h.run(6, "EKF converges below 1 cm in 20 rounds and matches Gauss-Newton to 1 mm",
        criterion_ekf_convergence);
  h.run(7, "error std at cell (4,5) inside the 2-7 cm band", criterion_precision_band);
  h.run(8, "NLOS bias on two links strictly raises the mean error at every cell",
        criterion_nlos_overestimation);
  h.run(9, "3-sigma ellipse contains 98.9% +- 0.5% of bivariate normal samples",
        criterion_ellipse_containment);
  h.run(10, "anchor tables persist bit-exactly; the room fixture loads verbatim",
        [&](std::string& d) { return criterion_persistence(d, data_dir, out_dir); });
  h.run(11, "grid-eval output is byte-identical across reruns",
        [&](std::string& d) { return criterion_determinism(d, cli, data_dir, out_dir); });

  if (h.failures > 0) {
    std::printf("%d criterion(s) failed\n", h.failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
