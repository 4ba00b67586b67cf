#include <doctest.h>

#include "fegut/geodesy.hpp"
#include "fegut/random.hpp"

using namespace fegut;

TEST_SUITE_BEGIN("geodesy");

TEST_CASE("equator and prime meridian map to the semi-major axis") {
  const Eigen::Vector3d e = geo::geodetic_to_ecef({0.0, 0.0, 0.0});
  CHECK(e.x() == doctest::Approx(6378137.0).epsilon(1e-12));
  CHECK(std::abs(e.y()) < 1e-9);
  CHECK(std::abs(e.z()) < 1e-9);
}

TEST_CASE("pole maps to the semi-minor axis") {
  const Eigen::Vector3d e = geo::geodetic_to_ecef({90.0, 0.0, 0.0});
  CHECK(std::hypot(e.x(), e.y()) < 1e-8);
  CHECK(e.z() == doctest::Approx(6356752.3142451795).epsilon(1e-12));
}

TEST_CASE("reference points against a high-precision external computation") {
  // Frozen from a 50-digit mpmath evaluation of the closed form.
  const Eigen::Vector3d apex = geo::geodetic_to_ecef({39.904987, 116.405289, 60.0352});
  CHECK((apex - Eigen::Vector3d(-2178907.6701141383, 4388363.8502437904, 4069936.9685800560))
            .norm() < 1e-6);

  const Eigen::Vector3d syd = geo::geodetic_to_ecef({-33.8688, 151.2093, 25.0});
  CHECK((syd - Eigen::Vector3d(-4646069.4639714450, 2553216.3394597117, -3534386.3202397471))
            .norm() < 1e-6);
}

TEST_CASE("inverse conversion basics") {
  const geo::GeodeticCoord g = geo::ecef_to_geodetic({0.0, 6378137.0, 0.0});
  CHECK(std::abs(g.lat_deg) < 1e-9);
  CHECK(g.lon_deg == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(std::abs(g.height_m) < 1e-6);

  const geo::GeodeticCoord rt = geo::ecef_to_geodetic(geo::geodetic_to_ecef({0.0, 0.0, 0.0}));
  CHECK(std::abs(rt.lat_deg) < 1e-9);
  CHECK(std::abs(rt.lon_deg) < 1e-9);
  CHECK(std::abs(rt.height_m) < 1e-6);
}

TEST_CASE("round trip over 1000 random points stays under 1e-6 m") {
  GaussianSampler rng(42);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double u = 0.5 + 0.5 * std::tanh(rng.standard_normal());  // (0,1)
    const geo::GeodeticCoord g{-89.0 + 178.0 * u, -180.0 + 360.0 * (0.5 + 0.5 * std::tanh(rng.standard_normal())),
                               -1000.0 + 101000.0 * (0.5 + 0.5 * std::tanh(rng.standard_normal()))};
    const Eigen::Vector3d e = geo::geodetic_to_ecef(g);
    const Eigen::Vector3d e2 = geo::geodetic_to_ecef(geo::ecef_to_geodetic(e));
    worst = std::max(worst, (e - e2).norm());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("earth center is rejected") {
  CHECK_THROWS_AS(geo::ecef_to_geodetic(Eigen::Vector3d::Zero()), std::domain_error);
}

TEST_CASE("enu frame basics") {
  const geo::GeodeticCoord origin{0.0, 0.0, 0.0};
  const geo::EnuFrame frame(origin);

  CHECK(frame.to_enu(frame.origin_ecef()).norm() < 1e-12);

  // At (0,0) the ECEF z axis points north.
  const Eigen::Vector3d north = frame.to_enu(frame.origin_ecef() + Eigen::Vector3d(0, 0, 1));
  CHECK((north - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);

  const Eigen::Matrix3d r = frame.rotation_ecef_to_enu();
  CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("enu transform preserves norms and round-trips") {
  const geo::EnuFrame frame({39.904987, 116.405289, 60.0352});
  GaussianSampler rng(7);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d d(100 * rng.standard_normal(), 100 * rng.standard_normal(),
                            100 * rng.standard_normal());
    const Eigen::Vector3d enu = frame.rotate_to_enu(d);
    CHECK(std::abs(enu.norm() - d.norm()) < 1e-9 * std::max(1.0, d.norm()));
    CHECK((frame.rotate_from_enu(enu) - d).norm() < 1e-9);

    const Eigen::Vector3d p = frame.origin_ecef() + d;
    CHECK((frame.from_enu(frame.to_enu(p)) - p).norm() < 1e-9);
  }
}

TEST_CASE("up component equals height difference for small offsets") {
  const geo::GeodeticCoord origin{47.0, 11.0, 500.0};
  const geo::EnuFrame frame(origin);
  for (double dh : {0.5, 5.0, 50.0}) {
    const Eigen::Vector3d above =
        geo::geodetic_to_ecef({origin.lat_deg, origin.lon_deg, origin.height_m + dh});
    CHECK(frame.to_enu(above).z() == doctest::Approx(dh).epsilon(1e-9));
  }
}

TEST_CASE("elevation angle of a zenith target is 90 degrees") {
  const geo::EnuFrame frame({25.0, -80.0, 10.0});
  const Eigen::Vector3d site = frame.origin_ecef();
  const Eigen::Vector3d up = frame.rotate_from_enu({0, 0, 1});
  CHECK(geo::rad2deg(geo::elevation_angle(site, site + 1e6 * up)) ==
        doctest::Approx(90.0).epsilon(1e-9));
}

TEST_SUITE_END();
