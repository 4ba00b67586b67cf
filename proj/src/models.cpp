#include "fegut/models.hpp"

#include <cmath>
#include <stdexcept>

namespace fegut::models {

Eigen::Matrix<double, kFullDim, kFullDim> transition_matrix(double dt) {
  Eigen::Matrix<double, kFullDim, kFullDim> f =
      Eigen::Matrix<double, kFullDim, kFullDim>::Identity();
  f.block<3, 3>(kPos, kVel) = dt * Eigen::Matrix3d::Identity();
  f.block<3, 3>(kPos, kAcc) = 0.5 * dt * dt * Eigen::Matrix3d::Identity();
  f.block<3, 3>(kVel, kAcc) = dt * Eigen::Matrix3d::Identity();
  f(kClockBias, kClockDrift) = dt;
  return f;
}

Eigen::Matrix<double, kDynamicDim, kDynamicDim> transition_matrix_dynamic(double dt) {
  return transition_matrix(dt).topLeftCorner<kDynamicDim, kDynamicDim>();
}

StateVector predict_state(const StateVector& x, const TransitionModel& m) {
  return transition_matrix(m.dt) * x;
}

Eigen::Matrix<double, kFullDim, kFullDim> process_noise_cov(const TransitionModel& m) {
  Eigen::Matrix<double, kFullDim, kFullDim> q =
      Eigen::Matrix<double, kFullDim, kFullDim>::Zero();
  const double dt = m.dt;
  const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt, dt5 = dt4 * dt;

  // White-noise-jerk block per axis over (r_i, v_i, a_i).
  const double qj = m.jerk_psd;
  const double block[3][3] = {{dt5 / 20.0, dt4 / 8.0, dt3 / 6.0},
                              {dt4 / 8.0, dt3 / 3.0, dt2 / 2.0},
                              {dt3 / 6.0, dt2 / 2.0, dt}};
  for (int axis = 0; axis < 3; ++axis) {
    const int idx[3] = {kPos + axis, kVel + axis, kAcc + axis};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) q(idx[i], idx[j]) = qj * block[i][j];
  }

  // Two-state clock: white FM on the bias plus integrated drift noise.
  q(kClockBias, kClockBias) = m.clock_bias_psd * dt + m.clock_drift_psd * dt3 / 3.0;
  q(kClockBias, kClockDrift) = m.clock_drift_psd * dt2 / 2.0;
  q(kClockDrift, kClockBias) = q(kClockBias, kClockDrift);
  q(kClockDrift, kClockDrift) = m.clock_drift_psd * dt;

  q(kTimeOffset, kTimeOffset) = m.td_psd * dt;
  return q;
}

Eigen::Matrix<double, kDynamicDim, kDynamicDim> process_noise_cov_dynamic(
    const TransitionModel& m) {
  return process_noise_cov(m).topLeftCorner<kDynamicDim, kDynamicDim>();
}

RangeRow pseudorange_model(const StateVector& x, const Eigen::Vector3d& sat_pos) {
  const Eigen::Vector3d r = x.segment<3>(kPos);
  const Eigen::Vector3d diff = sat_pos - r;
  const double rho = diff.norm();
  if (rho <= 0.0) throw std::domain_error("pseudorange_model: receiver coincides with satellite");

  RangeRow row;
  row.predicted = rho + x(kClockBias);
  row.gradient.segment<3>(kPos) = (-diff / rho).transpose();
  row.gradient(kClockBias) = 1.0;
  return row;
}

RangeRow doppler_model(const StateVector& x, const Eigen::Vector3d& sat_pos) {
  const Eigen::Vector3d r = x.segment<3>(kPos);
  const Eigen::Vector3d diff = sat_pos - r;
  const double rho = diff.norm();
  if (rho <= 0.0) throw std::domain_error("doppler_model: receiver coincides with satellite");
  const Eigen::Vector3d los = diff / rho;

  RangeRow row;
  row.predicted = -los.dot(x.segment<3>(kVel)) + x(kClockDrift);
  row.gradient.segment<3>(kVel) = (-los).transpose();
  row.gradient(kClockDrift) = 1.0;
  return row;
}

RangeRow uwb_model(const StateVector& x, const Eigen::Vector3d& anchor_pos) {
  const Eigen::Vector3d v = x.segment<3>(kVel);
  const Eigen::Vector3d a = x.segment<3>(kAcc);
  const double td = x(kTimeOffset);
  const Eigen::Vector3d effective = x.segment<3>(kPos) - v * td - 0.5 * a * td * td;
  const Eigen::Vector3d diff = anchor_pos - effective;
  const double rho = diff.norm();
  if (rho <= 0.0) throw std::domain_error("uwb_model: tag coincides with anchor");

  RangeRow row;
  row.predicted = rho;
  const Eigen::RowVector3d h_up = (-diff / rho).transpose();
  row.gradient.segment<3>(kPos) = h_up;
  row.gradient.segment<3>(kVel) = -h_up * td;
  row.gradient.segment<3>(kAcc) = -h_up * (0.5 * td * td);
  row.gradient(kTimeOffset) = (-h_up * (v + a * td))(0);
  return row;
}

MeasurementModel assemble_measurement(const StateVector& x, const scene::EpochMeasurements& epoch,
                                      const scene::NoiseSpec& noise) {
  const auto n = static_cast<int>(epoch.sats.size());
  const auto m = static_cast<int>(epoch.uwb.size());
  const int rows = 2 * n + m;

  MeasurementModel out;
  out.n_sats = n;
  out.n_anchors = m;
  out.predicted.resize(rows);
  out.measured.resize(rows);
  out.jacobian.setZero(rows, kFullDim);
  out.noise_std.resize(rows);

  for (int i = 0; i < n; ++i) {
    const auto& s = epoch.sats[static_cast<std::size_t>(i)];
    const RangeRow pr = pseudorange_model(x, s.sat_pos);
    out.predicted(i) = pr.predicted;
    out.measured(i) = s.pseudorange;
    out.jacobian.row(i) = pr.gradient;
    out.noise_std(i) = noise.sigma_pseudorange_m;

    const RangeRow dp = doppler_model(x, s.sat_pos);
    out.predicted(n + i) = dp.predicted;
    out.measured(n + i) = s.doppler;
    out.jacobian.row(n + i) = dp.gradient;
    out.noise_std(n + i) = noise.sigma_doppler_mps;
  }
  for (int j = 0; j < m; ++j) {
    const auto& u = epoch.uwb[static_cast<std::size_t>(j)];
    const RangeRow ur = uwb_model(x, u.anchor_pos);
    out.predicted(2 * n + j) = ur.predicted;
    out.measured(2 * n + j) = u.range;
    out.jacobian.row(2 * n + j) = ur.gradient;
    out.noise_std(2 * n + j) = noise.sigma_uwb_m;
  }
  return out;
}

}  // namespace fegut::models
