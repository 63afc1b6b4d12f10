#include "uwbsim/eval.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "uwbsim/detail/format.hpp"
#include "uwbsim/errors.hpp"

namespace uwbsim {

void GridSpec::validate() const {
  if (x_step <= 0.0 || y_step <= 0.0) {
    throw ConfigError("grid: step must be positive");
  }
  if (x_max < x_min || y_max < y_min) {
    throw ConfigError("grid: degenerate range");
  }
  if (rounds_per_cell < 2) {
    throw ConfigError("grid: rounds_per_cell must be >= 2");
  }
  if (!std::isfinite(z_tag)) {
    throw ConfigError("grid: z_tag must be finite");
  }
}

std::vector<std::pair<double, double>> GridSpec::intersections() const {
  validate();
  const auto nx = static_cast<std::int64_t>(std::floor((x_max - x_min) / x_step + 1e-9)) + 1;
  const auto ny = static_cast<std::int64_t>(std::floor((y_max - y_min) / y_step + 1e-9)) + 1;
  std::vector<std::pair<double, double>> points;
  points.reserve(static_cast<std::size_t>(nx * ny));
  for (std::int64_t ix = 0; ix < nx; ++ix) {
    for (std::int64_t iy = 0; iy < ny; ++iy) {
      points.emplace_back(x_min + static_cast<double>(ix) * x_step,
                          y_min + static_cast<double>(iy) * y_step);
    }
  }
  return points;
}

std::pair<double, double> error_stats(const std::vector<std::pair<double, double>>& fixes,
                                      std::pair<double, double> truth) {
  if (fixes.size() < 2) {
    throw InsufficientDataError("error_stats: need at least 2 fixes");
  }
  // Two accumulation passes; the second keeps the variance exact for the
  // Statistics-correctness oracle.
  double sum = 0.0;
  std::vector<double> errors;
  errors.reserve(fixes.size());
  for (const auto& [x, y] : fixes) {
    const double dx = x - truth.first;
    const double dy = y - truth.second;
    errors.push_back(std::sqrt(dx * dx + dy * dy));
    sum += errors.back();
  }
  const double n = static_cast<double>(errors.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double e : errors) {
    ss += (e - mean) * (e - mean);
  }
  const double std_dev = std::sqrt(ss / (n - 1.0));
  return {mean * 100.0, std_dev * 100.0};
}

ConfidenceEllipse confidence_ellipse(const Eigen::Matrix2d& cov2d,
                                     std::pair<double, double> center, double k) {
  if (k <= 0.0) {
    throw ConfigError("confidence_ellipse: k must be positive");
  }
  const double asym = std::abs(cov2d(0, 1) - cov2d(1, 0));
  const double scale = std::max(cov2d.cwiseAbs().maxCoeff(), 1e-300);
  if (asym > 1e-9 * scale) {
    throw DegenerateEllipseError("confidence_ellipse: covariance not symmetric");
  }

  // Closed-form 2x2 symmetric eigendecomposition.
  const double trace = cov2d(0, 0) + cov2d(1, 1);
  const double det = cov2d(0, 0) * cov2d(1, 1) - cov2d(0, 1) * cov2d(1, 0);
  const double disc = std::sqrt(std::max(trace * trace * 0.25 - det, 0.0));
  const double lambda_max = trace * 0.5 + disc;
  const double lambda_min = trace * 0.5 - disc;
  if (lambda_min <= 0.0 || lambda_min <= 1e-15 * lambda_max) {
    throw DegenerateEllipseError("confidence_ellipse: rank-deficient covariance");
  }

  double orientation = 0.0;
  if (std::abs(cov2d(0, 1)) > 1e-300) {
    orientation = std::atan2(lambda_max - cov2d(0, 0), cov2d(0, 1));
  } else if (cov2d(1, 1) > cov2d(0, 0)) {
    orientation = std::numbers::pi / 2.0;
  }
  // Normalize to (-pi/2, pi/2]; an ellipse has no axis direction sign.
  while (orientation > std::numbers::pi / 2.0) orientation -= std::numbers::pi;
  while (orientation <= -std::numbers::pi / 2.0) orientation += std::numbers::pi;

  ConfidenceEllipse ellipse;
  ellipse.center_x = center.first;
  ellipse.center_y = center.second;
  ellipse.semi_major = k * std::sqrt(lambda_max);
  ellipse.semi_minor = k * std::sqrt(lambda_min);
  ellipse.orientation_rad = orientation;
  return ellipse;
}

bool ellipse_contains(const Eigen::Matrix2d& cov2d, std::pair<double, double> center,
                      double k, std::pair<double, double> point) {
  const Eigen::Vector2d d(point.first - center.first, point.second - center.second);
  const double mahalanobis_sq = d.dot(cov2d.ldlt().solve(d));
  return mahalanobis_sq <= k * k;
}

GridResult run_grid(const GridSpec& grid, const AnchorTable& anchors,
                    const RangingScenario& scenario_template, const Schedule& schedule,
                    const EkfParams& ekf_params, RngSeed seed, const GridOptions& options) {
  grid.validate();
  schedule.validate();
  if (anchors.entries.empty()) {
    throw ConfigError("run_grid: anchor table is empty");
  }

  GridResult result;
  const auto points = grid.intersections();
  result.cells.reserve(points.size());

  for (std::size_t cell = 0; cell < points.size(); ++cell) {
    const auto [cx, cy] = points[cell];
    RangingScenario scenario = scenario_template;
    scenario.anchors = anchors;
    scenario.tag_pos = {cx, cy, grid.z_tag};

    // Streams are keyed by the cell's absolute position (mm-quantized),
    // never by visit order or grid extent: any sweep touching this cell
    // replays the same draws.
    const auto ix = static_cast<std::uint64_t>(std::llround(cx * 1000.0) + (1LL << 40));
    const auto iy = static_cast<std::uint64_t>(std::llround(cy * 1000.0) + (1LL << 40));
    const std::uint64_t cell_key = mix_keys(ix, iy);

    Session session(schedule, scenario, seed, cell_key);
    EkfLocalizer localizer(anchors.entries, ekf_params, options.ekf_mode);

    CellStats stats;
    stats.true_pos = scenario.tag_pos;
    std::vector<std::pair<double, double>> fixes2d;
    std::vector<Point3> fixes3d;
    for (std::int64_t r = 0; r < grid.rounds_per_cell; ++r) {
      const RoundResult round = session.run_round();
      localizer.process_round(round);
      if (!localizer.initialized()) {
        continue;
      }
      const Point3 est = localizer.state().position();
      fixes2d.emplace_back(est.x, est.y);
      fixes3d.push_back(est);
      result.fixes.push_back({cx, cy, round.round_index, est});
    }

    stats.n = static_cast<std::int64_t>(fixes2d.size());
    if (stats.n >= 2) {
      if (options.error_3d || options.metric == ErrorMetric::NormOfMeanOffset) {
        // Alternative metrics for study; the default path is below.
        double sum = 0.0;
        Point3 mean_offset;
        for (const Point3& est : fixes3d) {
          Point3 off = est - stats.true_pos;
          if (!options.error_3d) off.z = 0.0;
          mean_offset = mean_offset + off;
          sum += std::sqrt(off.x * off.x + off.y * off.y + off.z * off.z);
        }
        const double n = static_cast<double>(stats.n);
        mean_offset = mean_offset * (1.0 / n);
        if (options.metric == ErrorMetric::NormOfMeanOffset) {
          stats.mean_error_cm = 100.0 * std::sqrt(mean_offset.x * mean_offset.x +
                                                  mean_offset.y * mean_offset.y +
                                                  mean_offset.z * mean_offset.z);
        } else {
          stats.mean_error_cm = 100.0 * sum / n;
        }
        double ss = 0.0;
        const double mean_norm = sum / n;
        for (const Point3& est : fixes3d) {
          Point3 off = est - stats.true_pos;
          if (!options.error_3d) off.z = 0.0;
          const double e = std::sqrt(off.x * off.x + off.y * off.y + off.z * off.z);
          ss += (e - mean_norm) * (e - mean_norm);
        }
        stats.error_std_cm = 100.0 * std::sqrt(ss / (n - 1.0));
      } else {
        auto [mu, sigma] = error_stats(fixes2d, {cx, cy});
        stats.mean_error_cm = mu;
        stats.error_std_cm = sigma;
      }

      double mx = 0.0, my = 0.0, mz = 0.0;
      for (const Point3& est : fixes3d) {
        mx += est.x;
        my += est.y;
        mz += est.z;
      }
      const double n = static_cast<double>(stats.n);
      stats.sample_mean = {mx / n, my / n, mz / n};
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (const auto& [fx, fy] : fixes2d) {
        const double dx = fx - stats.sample_mean.x;
        const double dy = fy - stats.sample_mean.y;
        cov(0, 0) += dx * dx;
        cov(0, 1) += dx * dy;
        cov(1, 1) += dy * dy;
      }
      cov(1, 0) = cov(0, 1);
      stats.cov2d = cov / (n - 1.0);
    }
    result.cells.push_back(stats);
  }
  return result;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << content;
  out.flush();
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

std::string fmt(double v) { return detail::format_double(v); }

}  // namespace

void emit_reports(const GridResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  std::string cells = "x,y,mu_cm,sigma_cm,mean_x,mean_y,cov_xx,cov_xy,cov_yy,n\n";
  for (const CellStats& c : result.cells) {
    cells += fmt(c.true_pos.x) + "," + fmt(c.true_pos.y) + "," + fmt(c.mean_error_cm) + "," +
             fmt(c.error_std_cm) + "," + fmt(c.sample_mean.x) + "," + fmt(c.sample_mean.y) +
             "," + fmt(c.cov2d(0, 0)) + "," + fmt(c.cov2d(0, 1)) + "," + fmt(c.cov2d(1, 1)) +
             "," + std::to_string(c.n) + "\n";
  }
  write_file(out_dir / "cells.csv", cells);

  std::string fixes = "cell_x,cell_y,round,x,y,z\n";
  for (const FixRecord& f : result.fixes) {
    fixes += fmt(f.cell_x) + "," + fmt(f.cell_y) + "," + std::to_string(f.round) + "," +
             fmt(f.estimate.x) + "," + fmt(f.estimate.y) + "," + fmt(f.estimate.z) + "\n";
  }
  write_file(out_dir / "fixes.csv", fixes);

  std::string ellipses =
      "cell_x,cell_y,center_x,center_y,semi_major_m,semi_minor_m,orientation_rad\n";
  for (const CellStats& c : result.cells) {
    if (c.n < 2) continue;
    ConfidenceEllipse e;
    try {
      e = confidence_ellipse(c.cov2d, {c.sample_mean.x, c.sample_mean.y}, 3.0);
    } catch (const DegenerateEllipseError&) {
      continue;  // noiseless cells have a collapsed scatter; skip the row
    }
    ellipses += fmt(c.true_pos.x) + "," + fmt(c.true_pos.y) + "," + fmt(e.center_x) + "," +
                fmt(e.center_y) + "," + fmt(e.semi_major) + "," + fmt(e.semi_minor) + "," +
                fmt(e.orientation_rad) + "\n";
  }
  write_file(out_dir / "ellipses.csv", ellipses);
}

}  // namespace uwbsim
