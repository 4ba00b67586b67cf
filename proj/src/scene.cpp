#include "fegut/scene.hpp"

#include <cmath>

#include "fegut/errors.hpp"
#include "fegut/random.hpp"

namespace fegut::scene {
namespace {

// Azimuth/elevation slots (degrees) for the default 8-satellite sky. Spread
// keeps PDOP < 3 at the site and leaves margin above the 15 deg mask over a
// multi-minute run.
constexpr double kAzSlots[] = {0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0};
constexpr double kElSlots[] = {72.0, 35.0, 48.0, 28.0, 62.0, 40.0, 30.0, 55.0};

constexpr double kEarthGm = 3.986004418e14;  // [m^3/s^2]

}  // namespace

Constellation::Constellation(const ConstellationConfig& cfg, const geo::GeodeticCoord& site)
    : cfg_(cfg) {
  if (cfg.count < 4) throw ConfigError("constellation needs at least 4 satellites");
  if (cfg.count > 8) throw ConfigError("constellation supports at most 8 azimuth/elevation slots");

  const geo::EnuFrame frame(site);
  const Eigen::Vector3d site_ecef = frame.origin_ecef();
  const double radius = geo::kSemiMajorAxis + cfg.altitude_m;
  const double angular_rate = std::sqrt(kEarthGm / (radius * radius * radius));

  Eigen::MatrixXd geom(cfg.count, 4);
  for (int i = 0; i < cfg.count; ++i) {
    const double az = geo::deg2rad(kAzSlots[i]);
    const double el = geo::deg2rad(kElSlots[i]);
    if (geo::rad2deg(el) < cfg.elevation_mask_deg + 5.0)
      throw ConfigError("satellite slot too close to the elevation mask");

    // Unit LOS site -> satellite in ECEF, then the positive-range root of
    // |site + rho u| = radius places the satellite on its shell.
    const Eigen::Vector3d u_enu(std::sin(az) * std::cos(el), std::cos(az) * std::cos(el),
                                std::sin(el));
    const Eigen::Vector3d u = frame.rotate_from_enu(u_enu);
    const double b = u.dot(site_ecef);
    const double c = site_ecef.squaredNorm() - radius * radius;
    const double rho = -b + std::sqrt(b * b - c);
    const Eigen::Vector3d sat0 = site_ecef + rho * u;

    // Orbit plane: contains sat0, in-plane direction picked per-slot for variety.
    const Eigen::Vector3d seed_axis =
        (i % 2 == 0) ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d(0.3, 0.8, 0.52).normalized();
    Orbit orb;
    orb.id = i + 1;
    orb.e1 = sat0.normalized();
    orb.e2 = orb.e1.cross(seed_axis).norm() > 1e-6
                 ? orb.e1.cross(seed_axis).normalized()
                 : orb.e1.cross(Eigen::Vector3d::UnitX()).normalized();
    orb.radius = radius;
    orb.angular_rate = angular_rate;
    orb.phase0 = 0.0;
    orbits_.push_back(orb);

    geom.row(i) << -u.transpose(), 1.0;
  }

  const Eigen::Matrix4d info = (geom.transpose() * geom).inverse();
  pdop_ = std::sqrt(info(0, 0) + info(1, 1) + info(2, 2));
  if (!(pdop_ < cfg.max_pdop))
    throw ConfigError("constellation geometry PDOP " + std::to_string(pdop_) +
                      " exceeds limit " + std::to_string(cfg.max_pdop));
}

std::vector<SatelliteState> Constellation::at(double t) const {
  std::vector<SatelliteState> out;
  out.reserve(orbits_.size());
  for (const auto& orb : orbits_) {
    const double ang = orb.phase0 + orb.angular_rate * t;
    const double s = std::sin(ang), c = std::cos(ang);
    SatelliteState sat;
    sat.id = orb.id;
    sat.pos = orb.radius * (c * orb.e1 + s * orb.e2);
    sat.vel = orb.radius * orb.angular_rate * (-s * orb.e1 + c * orb.e2);
    out.push_back(sat);
  }
  return out;
}

AnchorSet place_anchors(const geo::EnuFrame& frame, const Eigen::Vector3d& center_enu,
                        double half_spacing_m, double height_m) {
  if (half_spacing_m <= 0.0) throw ConfigError("anchor half spacing must be positive");
  AnchorSet set;
  const double offs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (int j = 0; j < 4; ++j) {
    Anchor a;
    a.id = j + 1;
    a.pos = frame.from_enu(center_enu + Eigen::Vector3d(offs[j][0] * half_spacing_m,
                                                        offs[j][1] * half_spacing_m, height_m));
    set.anchors.push_back(a);
  }
  return set;
}

Dataset synthesize_dataset(const traj::TruthTable& truth, const Constellation& constellation,
                           const AnchorSet& anchors, const ClockSpec& clock,
                           const NoiseSpec& noise, double td_s, const DatasetRates& rates,
                           uint64_t seed, const geo::GeodeticCoord& origin,
                           UwbTimingModel timing) {
  if (td_s < 0.0) throw ConfigError("time offset must be nonnegative");
  if (rates.uwb_hz < rates.gnss_hz) throw ConfigError("uwb rate must be >= gnss rate");
  const double ratio = rates.uwb_hz / rates.gnss_hz;
  const auto gnss_every = static_cast<long>(std::lround(ratio));
  if (std::abs(ratio - static_cast<double>(gnss_every)) > 1e-9)
    throw ConfigError("uwb rate must be an integer multiple of gnss rate");
  if (noise.sigma_pseudorange_m < 0 || noise.sigma_doppler_mps < 0 || noise.sigma_uwb_m < 0)
    throw ConfigError("noise sigmas must be nonnegative");

  const double dt = 1.0 / rates.uwb_hz;
  const double t_last = truth.t_end();
  if (truth.t_begin() > -td_s)
    throw std::out_of_range("truth table does not cover the stale UWB lookback at t=0");

  const double mask_deg = constellation.config().elevation_mask_deg;

  GaussianSampler rng(seed);
  double bias = clock.initial_bias_m;
  double drift = clock.initial_drift_mps;

  Dataset ds;
  ds.meta.seed = seed;
  ds.meta.td_true_s = td_s;
  ds.meta.origin = origin;
  ds.meta.anchors = anchors;
  ds.meta.noise = noise;
  ds.meta.rates = rates;

  const auto n_epochs = static_cast<long>(std::floor(t_last / dt + 1e-9)) + 1;
  for (long k = 0; k < n_epochs; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t > t_last) break;

    // Receiver clock truth: two-state random walk stepped at epoch rate.
    if (k > 0) {
      drift += rng.normal(std::sqrt(clock.drift_psd * dt));
      bias += drift * dt + rng.normal(std::sqrt(clock.bias_psd * dt));
    }

    EpochMeasurements epoch;
    epoch.t = t;
    epoch.kind = (k % gnss_every == 0) ? EpochKind::GnssAndUwb : EpochKind::UwbOnly;

    const traj::MotionSample now = truth.sample(t);

    if (epoch.kind == EpochKind::GnssAndUwb) {
      for (const auto& sat : constellation.at(t)) {
        const double el_deg = geo::rad2deg(geo::elevation_angle(now.r, sat.pos));
        if (el_deg < mask_deg) continue;
        const Eigen::Vector3d los = (sat.pos - now.r).normalized();
        SatObs obs;
        obs.id = sat.id;
        obs.sat_pos = sat.pos;
        obs.sat_vel = sat.vel;
        obs.pseudorange = (sat.pos - now.r).norm() + bias + rng.normal(noise.sigma_pseudorange_m);
        obs.doppler = -los.dot(now.v) + drift + rng.normal(noise.sigma_doppler_mps);
        epoch.sats.push_back(obs);
      }
      if (epoch.sats.size() < 4)
        throw ConfigError("fewer than 4 satellites visible above the mask at t=" +
                          std::to_string(t));
    }

    // UWB ranging sees the world td seconds in the past.
    Eigen::Vector3d lagged;
    if (timing == UwbTimingModel::StaleTruth) {
      lagged = truth.sample(t - td_s).r;
    } else {
      lagged = now.r - now.v * td_s - 0.5 * now.a * td_s * td_s;
    }
    for (const auto& anchor : anchors.anchors) {
      UwbObs obs;
      obs.id = anchor.id;
      obs.anchor_pos = anchor.pos;
      obs.range = (anchor.pos - lagged).norm() + rng.normal(noise.sigma_uwb_m);
      epoch.uwb.push_back(obs);
    }

    ds.epochs.push_back(std::move(epoch));
  }
  return ds;
}

}  // namespace fegut::scene
