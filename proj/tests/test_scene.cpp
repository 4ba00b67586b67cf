#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fegut/dataset_io.hpp"
#include "fegut/errors.hpp"
#include "fegut/scene.hpp"

using namespace fegut;

namespace {

const geo::GeodeticCoord kOrigin{39.904987, 116.405289, 60.0352};

traj::TruthTable linear_motion_table(const Eigen::Vector3d& r0, const Eigen::Vector3d& v,
                                     double t0, double t1, double rate = 100.0) {
  const auto n = static_cast<std::size_t>(std::lround((t1 - t0) * rate)) + 1;
  std::vector<Eigen::Vector3d> rs(n), vs(n, v), as(n, Eigen::Vector3d::Zero());
  for (std::size_t i = 0; i < n; ++i) rs[i] = r0 + v * (t0 + static_cast<double>(i) / rate);
  return {t0, 1.0 / rate, std::move(rs), std::move(vs), std::move(as)};
}

scene::Dataset default_dataset(uint64_t seed, const scene::NoiseSpec& noise, double td,
                               double duration = 20.0,
                               scene::UwbTimingModel timing = scene::UwbTimingModel::StaleTruth) {
  traj::TrajectorySpec tspec;
  tspec.duration_s = duration;
  const traj::TruthTable truth = traj::build_truth_table(tspec);
  const geo::EnuFrame frame(kOrigin);
  const scene::Constellation constellation({}, kOrigin);
  const scene::AnchorSet anchors =
      scene::place_anchors(frame, traj::trajectory_center_enu(tspec), 50.0, 5.0);
  scene::ClockSpec clock;
  return scene::synthesize_dataset(truth, constellation, anchors, clock, noise, td, {5.0, 10.0},
                                   seed, kOrigin, timing);
}

}  // namespace

TEST_SUITE_BEGIN("scene");

TEST_CASE("constellation satisfies mask and pdop at the site") {
  const scene::Constellation constellation({}, kOrigin);
  CHECK(constellation.pdop_at_site() < 3.0);

  const Eigen::Vector3d site = geo::geodetic_to_ecef(kOrigin);
  for (double t : {0.0, 60.0, 240.0}) {
    const auto sats = constellation.at(t);
    REQUIRE(sats.size() == 8);
    for (const auto& s : sats)
      CHECK(geo::rad2deg(geo::elevation_angle(site, s.pos)) >= 15.0);
  }
}

TEST_CASE("satellite velocity is consistent with position finite differences") {
  const scene::Constellation constellation({}, kOrigin);
  const auto now = constellation.at(100.0);
  const auto later = constellation.at(101.0);
  for (std::size_t i = 0; i < now.size(); ++i) {
    CHECK((later[i].pos - now[i].pos - now[i].vel * 1.0).norm() < 1.0);
    // On-shell and circular: radius fixed.
    CHECK(now[i].pos.norm() == doctest::Approx(geo::kSemiMajorAxis + 20200e3).epsilon(1e-9));
  }
}

TEST_CASE("constellation geometry failures are configuration errors") {
  scene::ConstellationConfig cfg;
  cfg.elevation_mask_deg = 60.0;  // slots sit below mask+margin
  CHECK_THROWS_AS(scene::Constellation(cfg, kOrigin), ConfigError);
  cfg = {};
  cfg.count = 3;
  CHECK_THROWS_AS(scene::Constellation(cfg, kOrigin), ConfigError);
}

TEST_CASE("anchors form a square around the trajectory center") {
  const geo::EnuFrame frame(kOrigin);
  const Eigen::Vector3d center(100.0, 0.0, 0.0);
  const scene::AnchorSet set = scene::place_anchors(frame, center, 50.0, 5.0);
  REQUIRE(set.anchors.size() == 4);

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& a : set.anchors) {
    const Eigen::Vector3d rel = frame.to_enu(a.pos) - center;
    CHECK(std::abs(std::abs(rel.x()) - 50.0) < 1e-9);
    CHECK(std::abs(std::abs(rel.y()) - 50.0) < 1e-9);
    CHECK(rel.z() == doctest::Approx(5.0).epsilon(1e-9));
    centroid += rel;
  }
  CHECK(centroid.head<2>().norm() < 1e-9);  // horizontal centroid at the center
}

TEST_CASE("zero noise and zero offset reproduce geometry to interpolation accuracy") {
  const scene::NoiseSpec zero{0.0, 0.0, 0.0};
  scene::ClockSpec clock;
  clock.initial_drift_mps = 0.0;
  clock.bias_psd = clock.drift_psd = 0.0;

  traj::TrajectorySpec tspec;
  tspec.duration_s = 10.0;
  const traj::TruthTable truth = traj::build_truth_table(tspec);
  const geo::EnuFrame frame(kOrigin);
  const scene::Constellation constellation({}, kOrigin);
  const auto anchors = scene::place_anchors(frame, traj::trajectory_center_enu(tspec), 50.0, 5.0);
  const auto ds = scene::synthesize_dataset(truth, constellation, anchors, clock, zero, 0.0,
                                            {5.0, 10.0}, 1, kOrigin);

  for (const auto& e : ds.epochs) {
    const traj::MotionSample s = truth.sample(e.t);
    for (const auto& u : e.uwb) CHECK(std::abs(u.range - (u.anchor_pos - s.r).norm()) < 1e-6);
    for (const auto& g : e.sats)
      CHECK(std::abs(g.pseudorange - (g.sat_pos - s.r).norm()) < 1e-6);
  }
}

TEST_CASE("a 40 ms lag on radial motion shortens the range by 0.2 m") {
  // Tag receding straight east from the anchor at exactly 5 m/s, no noise.
  const geo::EnuFrame frame(kOrigin);
  const Eigen::Vector3d east = frame.rotate_from_enu({1.0, 0.0, 0.0});
  const Eigen::Vector3d anchor_pos = frame.origin_ecef();
  const Eigen::Vector3d r0 = anchor_pos + 500.0 * east;
  const traj::TruthTable truth = linear_motion_table(r0, 5.0 * east, -1.0, 10.0);

  scene::AnchorSet anchors;
  anchors.anchors.push_back({1, anchor_pos});
  scene::ClockSpec clock;
  clock.initial_drift_mps = 0.0;
  clock.bias_psd = clock.drift_psd = 0.0;

  const scene::Constellation constellation({}, kOrigin);
  const auto ds = scene::synthesize_dataset(truth, constellation, anchors, clock,
                                            {0.0, 0.0, 0.0}, 0.04, {1.0, 10.0}, 3, kOrigin);
  int checked = 0;
  for (const auto& e : ds.epochs) {
    if (e.t < 1.0) continue;
    const double true_range = (anchor_pos - truth.sample(e.t).r).norm();
    CHECK(e.uwb[0].range == doctest::Approx(true_range - 0.2).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("extrapolated timing mode matches the backward extrapolation exactly") {
  const scene::NoiseSpec zero{0.0, 0.0, 0.0};
  const auto ds = default_dataset(1, zero, 0.04, 5.0, scene::UwbTimingModel::Extrapolated);
  traj::TrajectorySpec tspec;
  tspec.duration_s = 5.0;
  const traj::TruthTable truth = traj::build_truth_table(tspec);
  for (const auto& e : ds.epochs) {
    const traj::MotionSample s = truth.sample(e.t);
    const Eigen::Vector3d eff = s.r - s.v * 0.04 - 0.5 * s.a * 0.04 * 0.04;
    for (const auto& u : e.uwb)
      CHECK(std::abs(u.range - (u.anchor_pos - eff).norm()) < 1e-9);
  }
}

TEST_CASE("pseudorange noise statistics match the configured sigma") {
  // Static receiver, long run, frozen clock: residual = noise only.
  const Eigen::Vector3d site = geo::geodetic_to_ecef(kOrigin);
  const traj::TruthTable truth =
      linear_motion_table(site, Eigen::Vector3d::Zero(), -1.0, 1250.0, 100.0);
  const geo::EnuFrame frame(kOrigin);
  const scene::Constellation constellation({}, kOrigin);
  const auto anchors = scene::place_anchors(frame, Eigen::Vector3d(100, 0, 0), 50.0, 5.0);
  scene::ClockSpec clock;
  clock.initial_drift_mps = 0.0;
  clock.bias_psd = clock.drift_psd = 0.0;
  const auto ds = scene::synthesize_dataset(truth, constellation, anchors, clock, {2.0, 0.1, 0.1},
                                            0.0, {1.0, 1.0}, 77, kOrigin);

  double sum = 0, sum2 = 0;
  int n = 0;
  for (const auto& e : ds.epochs) {
    for (const auto& g : e.sats) {
      const double resid = g.pseudorange - (g.sat_pos - site).norm();
      sum += resid;
      sum2 += resid * resid;
      ++n;
    }
  }
  REQUIRE(n >= 10000);
  const double mean = sum / n;
  const double std = std::sqrt(sum2 / n - mean * mean);
  CHECK(std > 1.9);
  CHECK(std < 2.1);
}

TEST_CASE("clock truth integrates drift into bias") {
  const scene::NoiseSpec zero{0.0, 0.0, 0.0};
  scene::ClockSpec clock;
  clock.initial_drift_mps = 0.1;
  clock.bias_psd = clock.drift_psd = 0.0;  // deterministic ramp

  traj::TrajectorySpec tspec;
  tspec.duration_s = 20.0;
  const traj::TruthTable truth = traj::build_truth_table(tspec);
  const geo::EnuFrame frame(kOrigin);
  const scene::Constellation constellation({}, kOrigin);
  const auto anchors = scene::place_anchors(frame, traj::trajectory_center_enu(tspec), 50.0, 5.0);
  const auto ds = scene::synthesize_dataset(truth, constellation, anchors, clock, zero, 0.0,
                                            {5.0, 10.0}, 1, kOrigin);

  for (const auto& e : ds.epochs) {
    if (e.sats.empty()) continue;
    const traj::MotionSample s = truth.sample(e.t);
    const double bias = e.sats[0].pseudorange - (e.sats[0].sat_pos - s.r).norm();
    // Absolute tolerance at the fp floor of a 2.4e7-m pseudorange.
    CHECK(std::abs(bias - 0.1 * e.t) < 5e-9);
  }
}

TEST_CASE("gnss epochs always carry at least 4 satellites") {
  const auto ds = default_dataset(5, {}, 0.04);
  int gnss_epochs = 0, uwb_only = 0;
  for (const auto& e : ds.epochs) {
    if (e.kind == scene::EpochKind::GnssAndUwb) {
      CHECK(e.sats.size() >= 4);
      CHECK(!e.uwb.empty());
      ++gnss_epochs;
    } else {
      CHECK(e.sats.empty());
      ++uwb_only;
    }
  }
  CHECK(gnss_epochs > 0);
  CHECK(uwb_only > 0);
  CHECK(std::abs(gnss_epochs - uwb_only) <= 1);  // alternating at 5 of 10 Hz
}

TEST_CASE("datasets are deterministic in the seed") {
  const auto a = default_dataset(11, {}, 0.04, 5.0);
  const auto b = default_dataset(11, {}, 0.04, 5.0);
  const auto c = default_dataset(12, {}, 0.04, 5.0);

  scene::write_dataset("/tmp/fegut_ds_a.jsonl", a);
  scene::write_dataset("/tmp/fegut_ds_b.jsonl", b);
  scene::write_dataset("/tmp/fegut_ds_c.jsonl", c);
  const auto slurp = [](const char* p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp("/tmp/fegut_ds_a.jsonl") == slurp("/tmp/fegut_ds_b.jsonl"));
  CHECK(slurp("/tmp/fegut_ds_a.jsonl") != slurp("/tmp/fegut_ds_c.jsonl"));
  std::remove("/tmp/fegut_ds_a.jsonl");
  std::remove("/tmp/fegut_ds_b.jsonl");
  std::remove("/tmp/fegut_ds_c.jsonl");
}

TEST_CASE("dataset file round trip is lossless") {
  const auto ds = default_dataset(21, {}, 0.04, 5.0);
  const char* path = "/tmp/fegut_ds_rt.jsonl";
  scene::write_dataset(path, ds);
  const auto back = scene::read_dataset(path);
  std::remove(path);

  REQUIRE(back.epochs.size() == ds.epochs.size());
  CHECK(back.meta.seed == ds.meta.seed);
  CHECK(back.meta.td_true_s == ds.meta.td_true_s);
  CHECK(back.meta.rates.gnss_hz == ds.meta.rates.gnss_hz);
  REQUIRE(back.meta.anchors.anchors.size() == 4);
  for (std::size_t i = 0; i < ds.epochs.size(); i += 7) {
    const auto& x = ds.epochs[i];
    const auto& y = back.epochs[i];
    CHECK(x.t == y.t);
    CHECK(x.kind == y.kind);
    REQUIRE(x.sats.size() == y.sats.size());
    for (std::size_t k = 0; k < x.sats.size(); ++k) {
      CHECK(x.sats[k].pseudorange == y.sats[k].pseudorange);
      CHECK(x.sats[k].doppler == y.sats[k].doppler);
      CHECK((x.sats[k].sat_pos - y.sats[k].sat_pos).norm() == 0.0);
    }
    for (std::size_t k = 0; k < x.uwb.size(); ++k) CHECK(x.uwb[k].range == y.uwb[k].range);
  }
}

TEST_CASE("truncated and malformed files give parse errors with line numbers") {
  const auto ds = default_dataset(31, {}, 0.04, 3.0);
  const char* path = "/tmp/fegut_ds_bad.jsonl";
  scene::write_dataset(path, ds);

  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  in.close();
  const std::string text = ss.str();

  {
    std::ofstream out(path);
    out << text.substr(0, text.size() / 2);  // cut mid-line
  }
  CHECK_THROWS_AS(scene::read_dataset(path), ParseError);
  try {
    scene::read_dataset(path);
  } catch (const ParseError& e) {
    CHECK(e.line() > 1);
  }

  {
    std::ofstream out(path);
    out << "{\"type\":\"something-else\"}\n";
  }
  CHECK_THROWS_AS(scene::read_dataset(path), ParseError);
  std::remove(path);
}

TEST_CASE("synthesis rejects invalid configurations") {
  traj::TrajectorySpec tspec;
  tspec.duration_s = 2.0;
  const traj::TruthTable truth = traj::build_truth_table(tspec);
  const geo::EnuFrame frame(kOrigin);
  const scene::Constellation constellation({}, kOrigin);
  const auto anchors = scene::place_anchors(frame, traj::trajectory_center_enu(tspec), 50.0, 5.0);

  CHECK_THROWS_AS(scene::synthesize_dataset(truth, constellation, anchors, {}, {}, -0.1,
                                            {1.0, 10.0}, 1, kOrigin),
                  ConfigError);
  CHECK_THROWS_AS(scene::synthesize_dataset(truth, constellation, anchors, {}, {}, 0.04,
                                            {10.0, 1.0}, 1, kOrigin),
                  ConfigError);
  CHECK_THROWS_AS(scene::synthesize_dataset(truth, constellation, anchors, {}, {}, 0.04,
                                            {3.0, 10.0}, 1, kOrigin),
                  ConfigError);
  CHECK_THROWS_AS(scene::place_anchors(frame, Eigen::Vector3d::Zero(), -1.0, 5.0), ConfigError);
}

TEST_SUITE_END();
