#include "uwbsim/ekf.hpp"

#include <cmath>

#include "uwbsim/errors.hpp"
#include "uwbsim/multilateration.hpp"

namespace uwbsim {

namespace {

Matrix6 transition_matrix(double dt) {
  Matrix6 f = Matrix6::Identity();
  f.block<3, 3>(0, 3) = dt * Eigen::Matrix3d::Identity();
  return f;
}

// Continuous-white-noise-acceleration process noise, spectral density
// q_accel^2 per axis.
Matrix6 process_noise(double dt, double q_accel) {
  const double q = q_accel * q_accel;
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  Matrix6 noise = Matrix6::Zero();
  noise.block<3, 3>(0, 0) = (q * dt3 / 3.0) * Eigen::Matrix3d::Identity();
  noise.block<3, 3>(0, 3) = (q * dt2 / 2.0) * Eigen::Matrix3d::Identity();
  noise.block<3, 3>(3, 0) = (q * dt2 / 2.0) * Eigen::Matrix3d::Identity();
  noise.block<3, 3>(3, 3) = (q * dt) * Eigen::Matrix3d::Identity();
  return noise;
}

void symmetrize(Matrix6& m) { m = 0.5 * (m + m.transpose()).eval(); }

double min_eigenvalue(const Matrix6& m) {
  Eigen::SelfAdjointEigenSolver<Matrix6> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// Joseph-form covariance update keeps P symmetric-PSD under roundoff.
void apply_scalar_update(EkfState& state, const Vector6& h_row, double innovation,
                         double innovation_var, double r2) {
  const Vector6 gain = state.P * h_row / innovation_var;
  state.x += gain * innovation;
  const Matrix6 identity_minus = Matrix6::Identity() - gain * h_row.transpose();
  state.P = identity_minus * state.P * identity_minus.transpose() + gain * r2 * gain.transpose();
  symmetrize(state.P);
}

}  // namespace

bool EkfState::covariance_healthy() const {
  const double scale = std::max(P.cwiseAbs().maxCoeff(), 1.0);
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    return false;
  }
  return min_eigenvalue(P) >= -1e-9;
}

EkfState EkfParams::initial_state(const Point3& pos) const {
  EkfState state;
  state.x << pos.x, pos.y, pos.z, 0.0, 0.0, 0.0;
  state.P = Matrix6::Zero();
  state.P.block<3, 3>(0, 0) = p0_pos * p0_pos * Eigen::Matrix3d::Identity();
  state.P.block<3, 3>(3, 3) = p0_vel * p0_vel * Eigen::Matrix3d::Identity();
  return state;
}

EkfState predict(const EkfState& state, double dt, const EkfParams& params) {
  if (min_eigenvalue(state.P) < -1e-9) {
    throw FilterDivergenceError("predict: input covariance not PSD");
  }
  const Matrix6 f = transition_matrix(dt);
  EkfState next;
  next.x = f * state.x;
  next.P = f * state.P * f.transpose() + process_noise(dt, params.q_accel);
  symmetrize(next.P);
  return next;
}

std::vector<double> predicted_ranges(const Point3& state_pos,
                                     const std::vector<Point3>& anchors) {
  std::vector<double> ranges;
  ranges.reserve(anchors.size());
  for (const Point3& a : anchors) {
    ranges.push_back(euclidean_distance(state_pos, a));
  }
  return ranges;
}

Eigen::MatrixXd measurement_jacobian(const Point3& state_pos,
                                     const std::vector<Point3>& anchors) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(anchors.size()), 6);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const Point3 delta = state_pos - anchors[i];
    const double dist = euclidean_distance(state_pos, anchors[i]);
    if (dist <= singular_distance_eps) {
      throw GeometryError("measurement_jacobian: anchor " + std::to_string(i) +
                          " coincident with the state position");
    }
    const auto row = static_cast<Eigen::Index>(i);
    jac(row, 0) = delta.x / dist;
    jac(row, 1) = delta.y / dist;
    jac(row, 2) = delta.z / dist;
  }
  return jac;
}

std::pair<EkfState, UpdateReport> update(const EkfState& state,
                                         const std::vector<RangeMeasurement>& measurements,
                                         const std::map<AnchorId, Point3>& anchors,
                                         const EkfParams& params, UpdateMode mode) {
  EkfState next = state;
  UpdateReport report;
  const double r2 = params.r_range * params.r_range;

  // Batch mode gates against the pre-update state, then stacks survivors.
  std::vector<Eigen::Index> batch_rows;
  Eigen::MatrixXd batch_h;
  Eigen::VectorXd batch_innov;
  if (mode == UpdateMode::Batch) {
    batch_h.resize(static_cast<Eigen::Index>(measurements.size()), 6);
    batch_innov.resize(static_cast<Eigen::Index>(measurements.size()));
  }

  for (const RangeMeasurement& m : measurements) {
    InnovationRecord rec;
    rec.anchor = m.anchor;
    rec.measured_m = m.distance_m;

    if (!m.valid) {
      rec.disposition = RangeDisposition::Invalid;
      report.records.push_back(rec);
      ++report.rejected;
      continue;
    }
    auto it = anchors.find(m.anchor);
    if (it == anchors.end()) {
      rec.disposition = RangeDisposition::Unknown;
      report.records.push_back(rec);
      ++report.rejected;
      continue;
    }

    const Point3 pos = next.position();
    const Point3 delta = pos - it->second;
    const double dist = euclidean_distance(pos, it->second);
    rec.predicted_m = dist;
    if (dist <= singular_distance_eps) {
      rec.disposition = RangeDisposition::Singular;
      report.records.push_back(rec);
      ++report.rejected;
      continue;
    }

    Vector6 h_row = Vector6::Zero();
    h_row(0) = delta.x / dist;
    h_row(1) = delta.y / dist;
    h_row(2) = delta.z / dist;

    const double innovation = m.distance_m - dist;
    const double innovation_var = h_row.dot(next.P * h_row) + r2;
    rec.innovation_m = innovation;
    if (std::abs(innovation) > params.gate_sigma * std::sqrt(innovation_var)) {
      rec.disposition = RangeDisposition::Gated;
      report.records.push_back(rec);
      ++report.rejected;
      continue;
    }

    rec.disposition = RangeDisposition::Accepted;
    report.records.push_back(rec);
    ++report.accepted;

    if (mode == UpdateMode::Sequential) {
      apply_scalar_update(next, h_row, innovation, innovation_var, r2);
    } else {
      const auto row = static_cast<Eigen::Index>(batch_rows.size());
      batch_h.row(row) = h_row.transpose();
      batch_innov(row) = innovation;
      batch_rows.push_back(row);
    }
  }

  if (mode == UpdateMode::Batch && !batch_rows.empty()) {
    const auto n = static_cast<Eigen::Index>(batch_rows.size());
    const Eigen::MatrixXd h = batch_h.topRows(n);
    const Eigen::VectorXd innov = batch_innov.head(n);
    const Eigen::MatrixXd s =
        h * next.P * h.transpose() + r2 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd gain = next.P * h.transpose() * s.ldlt().solve(
                                     Eigen::MatrixXd::Identity(n, n));
    next.x += gain * innov;
    const Matrix6 identity_minus = Matrix6::Identity() - gain * h;
    next.P = identity_minus * next.P * identity_minus.transpose() +
             gain * (r2 * Eigen::MatrixXd::Identity(n, n)) * gain.transpose();
    symmetrize(next.P);
  }

  return {next, report};
}

EkfLocalizer::EkfLocalizer(std::map<AnchorId, Point3> anchors, EkfParams params,
                           UpdateMode mode)
    : anchors_(std::move(anchors)), params_(params), mode_(mode) {
  if (!params_.valid()) {
    throw ConfigError("ekf: parameters must all be strictly positive");
  }
}

void EkfLocalizer::cold_start(const std::vector<RangeMeasurement>& measurements) {
  std::vector<std::pair<Point3, double>> ranges;
  for (const RangeMeasurement& m : measurements) {
    if (!m.valid) continue;
    auto it = anchors_.find(m.anchor);
    if (it == anchors_.end()) continue;
    ranges.emplace_back(it->second, m.distance_m);
  }
  if (ranges.empty()) {
    return;  // nothing usable yet, stay uninitialized
  }

  Point3 init;
  bool solved = false;
  try {
    init = solve_multilateration(ranges).position;
    solved = true;
  } catch (const SimError&) {
    // degenerate geometry or no convergence; fall through to the centroid
  }
  if (!solved) {
    Point3 c;
    for (const auto& [id, pos] : anchors_) {
      c = c + pos;
    }
    init = c * (1.0 / static_cast<double>(anchors_.size()));
  }

  state_ = params_.initial_state(init);
  initialized_ = true;
}

UpdateReport EkfLocalizer::process_round(const RoundResult& round) {
  UpdateReport report;
  if (!initialized_) {
    cold_start(round.measurements);
    return report;
  }

  const double round_seconds =
      static_cast<double>(round.t_round_end - round.t_round_start) * 1e-12;

  if (mode_ == UpdateMode::Batch) {
    state_ = predict(state_, round_seconds, params_);
    auto [next, rep] = update(state_, round.measurements, anchors_, params_, mode_);
    state_ = next;
    return rep;
  }

  // Sequential: prediction advances slot by slot, one scalar update each.
  if (round.measurements.empty()) {
    state_ = predict(state_, round_seconds, params_);
    return report;
  }
  const double slot_seconds =
      round_seconds / static_cast<double>(round.measurements.size());
  for (const RangeMeasurement& m : round.measurements) {
    state_ = predict(state_, slot_seconds, params_);
    auto [next, rep] = update(state_, {m}, anchors_, params_, UpdateMode::Sequential);
    state_ = next;
    report.records.insert(report.records.end(), rep.records.begin(), rep.records.end());
    report.accepted += rep.accepted;
    report.rejected += rep.rejected;
  }
  return report;
}

}  // namespace uwbsim
