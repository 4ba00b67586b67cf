#include "fegut/geodesy.hpp"

#include <cmath>
#include <stdexcept>

namespace fegut::geo {

Eigen::Vector3d geodetic_to_ecef(const GeodeticCoord& g) {
  const double lat = deg2rad(g.lat_deg);
  const double lon = deg2rad(g.lon_deg);
  const double slat = std::sin(lat), clat = std::cos(lat);
  const double slon = std::sin(lon), clon = std::cos(lon);
  const double n = kSemiMajorAxis / std::sqrt(1.0 - kEccentricitySq * slat * slat);
  return {(n + g.height_m) * clat * clon,
          (n + g.height_m) * clat * slon,
          (n * (1.0 - kEccentricitySq) + g.height_m) * slat};
}

GeodeticCoord ecef_to_geodetic(const Eigen::Vector3d& ecef) {
  const double p = std::hypot(ecef.x(), ecef.y());
  const double z = ecef.z();
  if (p + std::abs(z) < 1.0) {
    throw std::domain_error("ecef_to_geodetic: point at Earth center is degenerate");
  }

  const double a = kSemiMajorAxis, b = kSemiMinorAxis;
  const double e2 = kEccentricitySq;
  const double ep2 = e2 / (1.0 - e2);

  // Bowring's parametric-latitude seed, then fixed-point refinement.
  double beta = std::atan2(z * a, p * b);
  double lat = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double sb = std::sin(beta), cb = std::cos(beta);
    lat = std::atan2(z + ep2 * b * sb * sb * sb, p - e2 * a * cb * cb * cb);
    beta = std::atan((1.0 - kFlattening) * std::tan(lat));
  }

  const double slat = std::sin(lat), clat = std::cos(lat);
  const double w = std::sqrt(1.0 - e2 * slat * slat);
  // Pole-safe height: h = p cos(lat) + z sin(lat) - a W
  const double h = p * clat + z * slat - a * w;

  return {rad2deg(lat), rad2deg(std::atan2(ecef.y(), ecef.x())), h};
}

EnuFrame::EnuFrame(const GeodeticCoord& origin)
    : origin_(origin), origin_ecef_(geodetic_to_ecef(origin)) {
  const double lat = deg2rad(origin.lat_deg);
  const double lon = deg2rad(origin.lon_deg);
  const double slat = std::sin(lat), clat = std::cos(lat);
  const double slon = std::sin(lon), clon = std::cos(lon);
  rot_ << -slon, clon, 0.0,
      -slat * clon, -slat * slon, clat,
      clat * clon, clat * slon, slat;
}

double elevation_angle(const Eigen::Vector3d& site_ecef, const Eigen::Vector3d& target_ecef) {
  const EnuFrame frame(ecef_to_geodetic(site_ecef));
  const Eigen::Vector3d enu = frame.rotate_to_enu(target_ecef - site_ecef);
  return std::asin(enu.z() / enu.norm());
}

}  // namespace fegut::geo
