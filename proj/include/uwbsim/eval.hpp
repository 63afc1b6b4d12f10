#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <utility>
#include <vector>

#include "uwbsim/anchor_table.hpp"
#include "uwbsim/ekf.hpp"
#include "uwbsim/schedule.hpp"

namespace uwbsim {

/// Static evaluation lattice: tag positions at every grid intersection.
struct GridSpec {
  double x_min = 2.0, x_max = 6.0, x_step = 1.0;
  double y_min = 2.0, y_max = 8.0, y_step = 1.0;
  double z_tag = 1.0;              ///< fixed tag height during the sweep
  std::int64_t rounds_per_cell = 500;

  void validate() const;  ///< throws ConfigError
  std::vector<std::pair<double, double>> intersections() const;
};

/// Accuracy/precision statistics of one grid cell.
struct CellStats {
  Point3 true_pos;
  double mean_error_cm = 0.0;  ///< mean of per-fix 2-D error norms
  double error_std_cm = 0.0;   ///< sample std (n-1) of the error norms
  Point3 sample_mean;
  Eigen::Matrix2d cov2d = Eigen::Matrix2d::Zero();  ///< covariance of (x, y) fixes
  std::int64_t n = 0;          ///< accepted fix count; 0 flags an empty cell
};

/// One raw per-round fix, kept for fixes.csv.
struct FixRecord {
  double cell_x = 0.0, cell_y = 0.0;
  std::int64_t round = 0;
  Point3 estimate;
};

struct ConfidenceEllipse {
  double center_x = 0.0, center_y = 0.0;
  double semi_major = 0.0, semi_minor = 0.0;  ///< a >= b > 0 [m]
  double orientation_rad = 0.0;               ///< in (-pi/2, pi/2]
};

enum class ErrorMetric : std::uint8_t {
  MeanOfNorms,     ///< mean over per-fix error norms (default)
  NormOfMeanOffset ///< norm of the mean offset vector, for comparison
};

struct GridOptions {
  ErrorMetric metric = ErrorMetric::MeanOfNorms;
  bool error_3d = false;  ///< include z in the error norm
  UpdateMode ekf_mode = UpdateMode::Sequential;
};

struct GridResult {
  std::vector<CellStats> cells;
  std::vector<FixRecord> fixes;
};

/// Sweeps the grid: per intersection point a fresh filter (no carry-over),
/// rounds_per_cell rounds, statistics of the collected fixes against the
/// true 2-D position. Cell streams are keyed by cell indices, so visit
/// order cannot matter.
GridResult run_grid(const GridSpec& grid, const AnchorTable& anchors,
                    const RangingScenario& scenario_template, const Schedule& schedule,
                    const EkfParams& ekf_params, RngSeed seed,
                    const GridOptions& options = {});

/// Per-fix 2-D error statistics in centimeters: mean and sample std (n-1
/// denominator) of ||fix - truth||. Throws InsufficientDataError for < 2
/// fixes.
std::pair<double, double> error_stats(const std::vector<std::pair<double, double>>& fixes,
                                      std::pair<double, double> truth);

/// k-sigma ellipse of a 2-D covariance: semi-axes k*sqrt(eigenvalues),
/// orientation along the principal eigenvector. Throws
/// DegenerateEllipseError on a rank-deficient covariance. For bivariate
/// normal data the k-sigma ellipse contains 1 - exp(-k^2/2) of the
/// distribution (~98.9% at k = 3, not the 1-D 99.7% figure).
ConfidenceEllipse confidence_ellipse(const Eigen::Matrix2d& cov2d,
                                     std::pair<double, double> center, double k);

/// Containment test against the same k-sigma contour.
bool ellipse_contains(const Eigen::Matrix2d& cov2d, std::pair<double, double> center,
                      double k, std::pair<double, double> point);

/// Writes cells.csv, fixes.csv and ellipses.csv (k = 3) to out_dir.
/// Deterministic bytes for a fixed input. Throws IoError per file.
void emit_reports(const GridResult& result, const std::filesystem::path& out_dir);

}  // namespace uwbsim
