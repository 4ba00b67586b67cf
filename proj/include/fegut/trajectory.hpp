#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fegut/geodesy.hpp"

namespace fegut::traj {

enum class Shape { Lemniscate, Circle };

/// Ground-truth motion specification. The curve is laid out in the local ENU
/// tangent plane at `origin` (constant ENU height) and traversed at exactly
/// constant speed via arc-length reparameterization.
struct TrajectorySpec {
  Shape shape{Shape::Lemniscate};
  geo::GeodeticCoord origin{39.904987, 116.405289, 60.0352};  // western apex / western circle point
  double horizontal_extent_m{200.0};  // full east-west span of the lemniscate
  double circle_radius_m{100.0};
  double average_speed_mps{5.0};
  double duration_s{240.0};
  double table_rate_hz{1000.0};
  double pad_before_s{1.0};  // table starts at -pad so stale lookups at t - t_d stay in range
};

struct MotionSample {
  double t{0.0};
  Eigen::Vector3d r{Eigen::Vector3d::Zero()};  // ECEF [m]
  Eigen::Vector3d v{Eigen::Vector3d::Zero()};  // ECEF [m/s]
  Eigen::Vector3d a{Eigen::Vector3d::Zero()};  // ECEF [m/s^2]
};

/// Dense uniform-rate motion lookup table. Immutable after construction;
/// concurrent read-only sampling is safe.
class TruthTable {
 public:
  TruthTable(double t0, double dt, std::vector<Eigen::Vector3d> r, std::vector<Eigen::Vector3d> v,
             std::vector<Eigen::Vector3d> a);

  double t_begin() const { return t0_; }
  double t_end() const { return t0_ + dt_ * static_cast<double>(size() - 1); }
  double dt() const { return dt_; }
  std::size_t size() const { return r_.size(); }

  MotionSample at(std::size_t i) const { return {t0_ + dt_ * static_cast<double>(i), r_[i], v_[i], a_[i]}; }

  /// Cubic Hermite interpolation: position from (r, v), velocity from (v, a),
  /// acceleration as the derivative of the velocity segment. Throws
  /// std::out_of_range outside the table span.
  MotionSample sample(double t) const;

  void write_csv(const std::string& path) const;
  static TruthTable read_csv(const std::string& path);

  /// Time to traverse the closed curve once; 0 for hand-built tables.
  double lap_duration_s{0.0};

 private:
  double t0_, dt_;
  std::vector<Eigen::Vector3d> r_, v_, a_;
};

TruthTable build_truth_table(const TrajectorySpec& spec);

/// ENU center of the closed curve (anchor placement reference).
Eigen::Vector3d trajectory_center_enu(const TrajectorySpec& spec);

}  // namespace fegut::traj
