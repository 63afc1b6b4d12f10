#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "uwbsim/geometry.hpp"
#include "uwbsim/schedule.hpp"
#include "uwbsim/twr.hpp"

namespace uwbsim {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Filter state: [x, y, z, vx, vy, vz] with 6x6 covariance.
struct EkfState {
  Vector6 x = Vector6::Zero();
  Matrix6 P = Matrix6::Identity();

  Point3 position() const { return {x(0), x(1), x(2)}; }
  Point3 velocity() const { return {x(3), x(4), x(5)}; }

  /// Symmetric within 1e-12 relative and eigenvalues >= -1e-9.
  bool covariance_healthy() const;
};

struct EkfParams {
  double q_accel = 0.5;   ///< white-noise acceleration level [m/s^2]
  double r_range = 0.05;  ///< range measurement std [m]
  double p0_pos = 1.0;    ///< initial position std [m]
  double p0_vel = 0.5;    ///< initial velocity std [m/s]
  double dt = 0.25;       ///< default prediction interval [s]
  double gate_sigma = 5.0;///< innovation gate, multiples of predicted std

  bool valid() const {
    return q_accel > 0 && r_range > 0 && p0_pos > 0 && p0_vel > 0 && dt > 0 &&
           gate_sigma > 0;
  }

  EkfState initial_state(const Point3& pos) const;
};

/// Constant-velocity prediction: x <- F x, P <- F P F' + Q(dt).
/// Q is the continuous-white-noise-acceleration form with spectral density
/// q_accel^2 per axis. Throws FilterDivergenceError on a non-PSD input
/// covariance.
EkfState predict(const EkfState& state, double dt, const EkfParams& params);

/// Distances from a position to each anchor [m].
std::vector<double> predicted_ranges(const Point3& state_pos,
                                     const std::vector<Point3>& anchors);

/// Minimum tag-anchor separation before the range gradient blows up [m].
inline constexpr double singular_distance_eps = 1e-6;

/// Gradient of the predicted distances with respect to the 6-D state:
/// row i is [(x - x_i)/dist_i, (y - y_i)/dist_i, (z - z_i)/dist_i, 0, 0, 0].
/// Position-block rows have unit norm. Throws GeometryError when an anchor
/// is within singular_distance_eps of state_pos.
Eigen::MatrixXd measurement_jacobian(const Point3& state_pos,
                                     const std::vector<Point3>& anchors);

/// Why a range did or did not enter the update.
enum class RangeDisposition : std::uint8_t {
  Accepted,
  Invalid,   ///< lost or flagged by the ranging engine
  Gated,     ///< |innovation| above gate_sigma * predicted innovation std
  Singular,  ///< anchor coincident with the state position
  Unknown,   ///< anchor id not in the table
};

struct InnovationRecord {
  AnchorId anchor;
  double predicted_m = 0.0;
  double measured_m = 0.0;
  double innovation_m = 0.0;
  RangeDisposition disposition = RangeDisposition::Invalid;
};

struct UpdateReport {
  std::vector<InnovationRecord> records;
  int accepted = 0;
  int rejected = 0;
};

enum class UpdateMode : std::uint8_t {
  Sequential,  ///< one scalar update per range, in slot order
  Batch,       ///< a single stacked update per round
};

/// Measurement update from one round of range measurements.
///
/// Invalid measurements are skipped; accepted ranges pass the innovation
/// gate. With every measurement rejected the state is returned unchanged
/// alongside an all-rejected report.
std::pair<EkfState, UpdateReport> update(const EkfState& state,
                                         const std::vector<RangeMeasurement>& measurements,
                                         const std::map<AnchorId, Point3>& anchors,
                                         const EkfParams& params,
                                         UpdateMode mode = UpdateMode::Sequential);

/// Round-by-round position tracker: cold start plus predict/update cadence.
///
/// The first round with usable ranges initializes the position from the
/// Gauss-Newton multilateration solve (anchor centroid when the solve
/// fails), then every round runs constant-velocity prediction followed by
/// the range update. In Sequential mode prediction advances slot by slot,
/// in Batch mode once per round.
class EkfLocalizer {
 public:
  EkfLocalizer(std::map<AnchorId, Point3> anchors, EkfParams params,
               UpdateMode mode = UpdateMode::Sequential);

  /// Consumes one round; returns the innovation report. No-op (empty report)
  /// while uninitialized and the round carries no usable ranges.
  UpdateReport process_round(const RoundResult& round);

  bool initialized() const { return initialized_; }
  const EkfState& state() const { return state_; }
  const std::map<AnchorId, Point3>& anchors() const { return anchors_; }

 private:
  std::map<AnchorId, Point3> anchors_;
  EkfParams params_;
  UpdateMode mode_;
  EkfState state_;
  bool initialized_ = false;

  void cold_start(const std::vector<RangeMeasurement>& measurements);
};

}  // namespace uwbsim
