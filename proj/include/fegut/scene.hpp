#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fegut/geodesy.hpp"
#include "fegut/trajectory.hpp"

namespace fegut::scene {

struct SatelliteState {
  int id{0};
  Eigen::Vector3d pos{Eigen::Vector3d::Zero()};  // ECEF [m]
  Eigen::Vector3d vel{Eigen::Vector3d::Zero()};  // ECEF [m/s]
};

struct Anchor {
  int id{0};
  Eigen::Vector3d pos{Eigen::Vector3d::Zero()};  // ECEF [m]
};

struct AnchorSet {
  std::vector<Anchor> anchors;
};

struct ConstellationConfig {
  int count{8};
  double altitude_m{20200e3};
  double elevation_mask_deg{15.0};
  double max_pdop{3.0};
};

/// Deterministic circular-orbit constellation. Satellites are placed on
/// Earth-centered circles through prescribed azimuth/elevation slots as seen
/// from the scenario site; geometry (visibility margin, PDOP) is checked at
/// construction.
class Constellation {
 public:
  Constellation(const ConstellationConfig& cfg, const geo::GeodeticCoord& site);

  std::vector<SatelliteState> at(double t) const;
  double pdop_at_site() const { return pdop_; }
  const ConstellationConfig& config() const { return cfg_; }

 private:
  struct Orbit {
    int id;
    Eigen::Vector3d e1, e2;  // orthonormal in-plane basis, |sat| = radius
    double radius, angular_rate, phase0;
  };
  ConstellationConfig cfg_;
  std::vector<Orbit> orbits_;
  double pdop_{0.0};
};

struct ClockSpec {
  double initial_bias_m{0.0};
  double initial_drift_mps{0.1};
  double bias_psd{1e-3};   // [m^2/s]
  double drift_psd{1e-4};  // [m^2/s^3]
};

struct NoiseSpec {
  double sigma_pseudorange_m{2.0};
  double sigma_doppler_mps{0.1};
  double sigma_uwb_m{0.1};
};

enum class EpochKind { GnssAndUwb, UwbOnly };

struct SatObs {
  int id{0};
  Eigen::Vector3d sat_pos{Eigen::Vector3d::Zero()};
  Eigen::Vector3d sat_vel{Eigen::Vector3d::Zero()};
  double pseudorange{0.0};  // [m]
  double doppler{0.0};      // range-rate [m/s]
};

struct UwbObs {
  int id{0};
  Eigen::Vector3d anchor_pos{Eigen::Vector3d::Zero()};
  double range{0.0};  // [m]
};

struct EpochMeasurements {
  double t{0.0};
  EpochKind kind{EpochKind::GnssAndUwb};
  std::vector<SatObs> sats;
  std::vector<UwbObs> uwb;
};

struct DatasetRates {
  double gnss_hz{1.0};
  double uwb_hz{10.0};
};

/// How the UWB time lag is imprinted on the synthesized ranges.
/// StaleTruth ranges to the true position td seconds in the past;
/// Extrapolated ranges to r - v*td - 0.5*a*td^2, the estimator's own
/// backward extrapolation. The two differ by a*td^2 (about a millimeter
/// here); the second keeps noise-free data exactly consistent with the
/// measurement model, which the convergence oracles need.
enum class UwbTimingModel { StaleTruth, Extrapolated };

struct DatasetMeta {
  std::string config_hash;
  uint64_t seed{0};
  double td_true_s{0.0};
  geo::GeodeticCoord origin;
  AnchorSet anchors;
  NoiseSpec noise;
  DatasetRates rates;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<EpochMeasurements> epochs;
};

/// Four anchors on the corners of a square around the trajectory center:
/// ENU offsets (+/-half_spacing, +/-half_spacing, height).
AnchorSet place_anchors(const geo::EnuFrame& frame, const Eigen::Vector3d& center_enu,
                        double half_spacing_m, double height_m);

/// Synthesize noisy, time-misaligned measurements from the truth table.
/// GNSS observables are taken from the truth at the epoch timestamp; UWB
/// ranges are taken from the truth at (t - td), so UWB data carries stale
/// motion that the estimator has to calibrate out.
Dataset synthesize_dataset(const traj::TruthTable& truth, const Constellation& constellation,
                           const AnchorSet& anchors, const ClockSpec& clock,
                           const NoiseSpec& noise, double td_s, const DatasetRates& rates,
                           uint64_t seed, const geo::GeodeticCoord& origin,
                           UwbTimingModel timing = UwbTimingModel::StaleTruth);

}  // namespace fegut::scene
