#pragma once

#include <Eigen/Dense>

namespace fegut::geo {

// WGS84 ellipsoid
inline constexpr double kSemiMajorAxis = 6378137.0;           // [m]
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kSemiMinorAxis = kSemiMajorAxis * (1.0 - kFlattening);
inline constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);

inline double deg2rad(double deg) { return deg * M_PI / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / M_PI; }

struct GeodeticCoord {
  double lat_deg{0.0};   // [-90, 90]
  double lon_deg{0.0};   // [-180, 180]
  double height_m{0.0};  // above WGS84 ellipsoid
};

/// Closed-form WGS84 geodetic -> ECEF conversion.
Eigen::Vector3d geodetic_to_ecef(const GeodeticCoord& g);

/// ECEF -> geodetic via Bowring's method plus fixed-point refinement.
/// Throws std::domain_error for points at the Earth center.
GeodeticCoord ecef_to_geodetic(const Eigen::Vector3d& ecef);

/// Local East-North-Up tangent frame anchored at a geodetic origin.
/// The origin is carried by the frame; ENU vectors are plain Vector3d.
class EnuFrame {
 public:
  explicit EnuFrame(const GeodeticCoord& origin);

  Eigen::Vector3d to_enu(const Eigen::Vector3d& ecef) const {
    return rot_ * (ecef - origin_ecef_);
  }
  Eigen::Vector3d from_enu(const Eigen::Vector3d& enu) const {
    return rot_.transpose() * enu + origin_ecef_;
  }
  /// Rotate a direction (velocity, acceleration) without translation.
  Eigen::Vector3d rotate_to_enu(const Eigen::Vector3d& ecef_dir) const { return rot_ * ecef_dir; }
  Eigen::Vector3d rotate_from_enu(const Eigen::Vector3d& enu_dir) const {
    return rot_.transpose() * enu_dir;
  }

  const GeodeticCoord& origin() const { return origin_; }
  const Eigen::Vector3d& origin_ecef() const { return origin_ecef_; }
  const Eigen::Matrix3d& rotation_ecef_to_enu() const { return rot_; }

 private:
  GeodeticCoord origin_;
  Eigen::Vector3d origin_ecef_;
  Eigen::Matrix3d rot_;  // ECEF -> ENU
};

/// Elevation angle [rad] of a target as seen from a site, both in ECEF.
double elevation_angle(const Eigen::Vector3d& site_ecef, const Eigen::Vector3d& target_ecef);

}  // namespace fegut::geo
