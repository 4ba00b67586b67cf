#pragma once

#include <string>
#include <vector>

#include "fegut/config.hpp"
#include "fegut/dataset_io.hpp"
#include "fegut/eval.hpp"

namespace fegut::experiment {

struct Scenario {
  traj::TruthTable truth;
  scene::Dataset dataset;
};

/// Build the truth table and synthesize the dataset for one seed.
Scenario build_scenario(const config::ExperimentConfig& cfg, uint64_t seed);

struct DebugSinks {
  std::string* ekf_state_trace{nullptr};
  std::ostream* fgo_dump{nullptr};
};

/// estimator is "ekf" or "fegut".
std::vector<pipeline::EpochOutput> run_estimator(const config::ExperimentConfig& cfg,
                                                 const scene::Dataset& dataset,
                                                 const std::string& estimator,
                                                 const DebugSinks& debug = {});

struct SeedResult {
  uint64_t seed{0};
  eval::Comparison comparison;
};

/// Simulate + run both estimators + evaluate, all in memory.
SeedResult run_seed(const config::ExperimentConfig& cfg, uint64_t seed,
                    const traj::TruthTable* truth = nullptr);

struct Aggregate {
  double mean{0.0};
  double stddev{0.0};
};

struct MonteCarloSummary {
  std::vector<SeedResult> per_seed;
  Aggregate ekf_horizontal, ekf_vertical, ekf_td_ms;
  Aggregate fegut_horizontal, fegut_vertical, fegut_td_ms;
  Aggregate enhancement_horizontal, enhancement_vertical, enhancement_td;
  /// Enhancements recomputed from the mean RMSEs.
  double enhancement_of_means_horizontal{0.0};
  double enhancement_of_means_vertical{0.0};
  double enhancement_of_means_td{0.0};
};

/// Seeds fan out over a small worker pool; aggregation is a sequential
/// reduce in seed order, so results are deterministic.
MonteCarloSummary run_montecarlo(const config::ExperimentConfig& cfg,
                                 const std::vector<uint64_t>& seeds, int workers = 0);

std::string format_montecarlo_table(const MonteCarloSummary& s);
void write_montecarlo_csv(const std::string& path, const MonteCarloSummary& s,
                          const std::string& hash);

}  // namespace fegut::experiment
