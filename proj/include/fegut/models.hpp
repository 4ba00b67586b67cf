#pragma once

#include <Eigen/Dense>

#include "fegut/scene.hpp"

namespace fegut::models {

// State layout, shared by the filter and the optimizer:
//   [ r(3) v(3) a(3) clock_bias clock_drift | time_offset ]
// The first 11 entries are the time-varying part; the time offset is the
// window-constant tail.
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kAcc = 6;
inline constexpr int kClockBias = 9;
inline constexpr int kClockDrift = 10;
inline constexpr int kTimeOffset = 11;
inline constexpr int kDynamicDim = 11;
inline constexpr int kFullDim = 12;

using StateVector = Eigen::Matrix<double, kFullDim, 1>;     // full 12-state
using DynamicState = Eigen::Matrix<double, kDynamicDim, 1>; // without the time offset

inline StateVector join_state(const DynamicState& dyn, double td) {
  StateVector x;
  x << dyn, td;
  return x;
}

/// Constant-acceleration kinematics plus a two-state receiver clock.
/// Process noise: white jerk per axis, white FM bias / white drift-rate
/// clock, optional random walk on the time offset (zero in window-constant
/// mode).
struct TransitionModel {
  double dt{1.0};
  double jerk_psd{0.1};         // [m^2/s^5]
  double clock_bias_psd{1e-3};  // [m^2/s]
  double clock_drift_psd{1e-4}; // [m^2/s^3]
  double td_psd{0.0};           // [s^2/s]
};

Eigen::Matrix<double, kFullDim, kFullDim> transition_matrix(double dt);
Eigen::Matrix<double, kDynamicDim, kDynamicDim> transition_matrix_dynamic(double dt);

StateVector predict_state(const StateVector& x, const TransitionModel& m);

/// Closed-form discretization of the white-noise models above. Symmetric PSD.
Eigen::Matrix<double, kFullDim, kFullDim> process_noise_cov(const TransitionModel& m);
Eigen::Matrix<double, kDynamicDim, kDynamicDim> process_noise_cov_dynamic(const TransitionModel& m);

/// Predicted scalar measurement with its gradient row over the full state.
struct RangeRow {
  double predicted{0.0};
  Eigen::Matrix<double, 1, kFullDim> gradient{Eigen::Matrix<double, 1, kFullDim>::Zero()};
};

/// Pseudorange: |sat - r| + clock_bias. Gradient has the negative unit LOS in
/// the position block and 1 in the clock-bias column.
RangeRow pseudorange_model(const StateVector& x, const Eigen::Vector3d& sat_pos);

/// Range-rate Doppler: -los.v + clock_drift. The LOS dependence on position is
/// left out of the gradient, matching the block-sparse measurement matrix.
RangeRow doppler_model(const StateVector& x, const Eigen::Vector3d& sat_pos);

/// UWB range to the time-offset-compensated position
/// r - v*td - 0.5*a*td^2. Gradient blocks satisfy
///   d/dv = -td * d/dr,  d/da = -0.5 td^2 * d/dr,  d/dtd = -d/dr . (v + a td).
RangeRow uwb_model(const StateVector& x, const Eigen::Vector3d& anchor_pos);

/// Stacked measurement model for one epoch, rows ordered pseudoranges,
/// Dopplers, UWB ranges. UWB-only epochs produce only the UWB block.
struct MeasurementModel {
  Eigen::VectorXd predicted;
  Eigen::VectorXd measured;
  Eigen::MatrixXd jacobian;   // rows x 12
  Eigen::VectorXd noise_std;  // per-row sigma
  int n_sats{0};
  int n_anchors{0};
};

MeasurementModel assemble_measurement(const StateVector& x, const scene::EpochMeasurements& epoch,
                                      const scene::NoiseSpec& noise);

}  // namespace fegut::models
