#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fegut/pipeline.hpp"
#include "fegut/scene.hpp"
#include "fegut/trajectory.hpp"

namespace fegut::config {

/// One experiment: scenario synthesis knobs plus estimator settings.
/// Parsed from a single JSON file; unknown keys are rejected.
struct ExperimentConfig {
  // scenario
  traj::TrajectorySpec trajectory;
  double anchor_half_spacing_m{50.0};
  double anchor_height_m{5.0};
  scene::ConstellationConfig constellation;
  scene::ClockSpec clock;
  scene::NoiseSpec noise;          // measurement synthesis
  scene::NoiseSpec estimator_noise;  // filter/solver R; defaults to `noise` unless zero
  double td_true_s{0.04};
  scene::UwbTimingModel uwb_timing{scene::UwbTimingModel::StaleTruth};
  // 2:1 keeps UWB-only epochs in the stream while the graph still sees
  // enough epochs for the time offset to be well determined (its signal
  // enters through acceleration, so information scales with epoch count).
  scene::DatasetRates rates{5.0, 10.0};
  uint64_t seed{1};

  // estimator
  int window_size{10};
  pipeline::FeedbackMode feedback{pipeline::FeedbackMode::EverySolve};
  double feedback_alpha{1.0};
  double initial_td_s{0.0};
  double jerk_psd{0.1};
  double clock_bias_psd{1e-3};
  double clock_drift_psd{1e-4};
  // Baseline-EKF time-offset random walk. Nonzero keeps that filter tracking
  // td instead of freezing; the window-constant graph needs no such term.
  double ekf_td_psd{2e-3};
  Eigen::Matrix<double, 12, 1> prior_cov_diag{
      (Eigen::Matrix<double, 12, 1>() << 100, 100, 100, 1, 1, 1, 0.1, 0.1, 0.1, 100, 1, 1e-2)
          .finished()};
  fgo::SolverConfig solver;
  bool innovation_gate{false};

  // evaluation
  double convergence_cut_s{10.0};
  std::vector<uint64_t> montecarlo_seeds{1, 2, 3, 4, 5};
};

ExperimentConfig default_config();

/// Throws ConfigError on unknown keys, malformed JSON or invariant violations.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON rendering (sorted keys, full precision).
std::string to_json(const ExperimentConfig& cfg);

/// FNV-1a 64-bit over the canonical rendering; stable provenance tag.
std::string config_hash(const ExperimentConfig& cfg);

/// Assemble the estimator-side pipeline settings.
pipeline::PipelineConfig make_pipeline_config(const ExperimentConfig& cfg);

}  // namespace fegut::config
