#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fegut/ekf.hpp"
#include "fegut/fgo.hpp"

namespace fegut::pipeline {

enum class FeedbackMode { EverySolve, Damped };

struct PipelineConfig {
  ekf::EkfConfig ekf;
  fgo::SolverConfig solver;
  FeedbackMode feedback{FeedbackMode::EverySolve};
  double feedback_alpha{1.0};  // Damped mode: td <- alpha*fgo + (1-alpha)*old
  double initial_td{0.0};
  bool debug_force_solver_failure{false};  // test hook for the degradation path
  std::string* ekf_state_trace{nullptr};   // optional per-epoch filter trace sink
};

enum class OutputSource { ColdStart, EkfOnly, Hybrid, EkfFallback };

struct EpochOutput {
  double t{0.0};
  Eigen::Vector3d r{Eigen::Vector3d::Zero()};
  Eigen::Vector3d v{Eigen::Vector3d::Zero()};
  double td{0.0};
  double clock_bias{0.0};
  double clock_drift{0.0};
  OutputSource source{OutputSource::EkfOnly};
  bool has_fix{true};  // false only while waiting for the first GNSS epoch
  double fgo_cost{0.0};
  int fgo_iterations{0};
  double fgo_td_std{0.0};
  bool fgo_td_rank_deficient{false};
  std::string warning;
};

struct ColdStartFix {
  Eigen::Vector3d r{Eigen::Vector3d::Zero()};
  Eigen::Vector3d v{Eigen::Vector3d::Zero()};
  double clock_bias{0.0};
  double clock_drift{0.0};
  int iterations{0};
};

/// Iterative least-squares position/clock fix from pseudoranges plus a linear
/// velocity/drift solve from Dopplers. Throws ColdStartError with fewer than
/// 4 satellites.
ColdStartFix cold_start(const scene::EpochMeasurements& epoch);

/// The hybrid estimator: an 11-state EKF produces position/velocity, the
/// sliding-window graph estimates the shared time offset and feeds it back.
class FegutPipeline {
 public:
  explicit FegutPipeline(const PipelineConfig& cfg);

  /// Exactly one output per input epoch, in timestamp order.
  EpochOutput step(const scene::EpochMeasurements& epoch);

  bool initialized() const { return filter_.has_value(); }
  const ekf::Ekf& filter() const { return *filter_; }
  const fgo::FactorGraph& graph() const { return graph_; }

 private:
  EpochOutput output_from_filter(const scene::EpochMeasurements& epoch,
                                 OutputSource source) const;
  void trace_filter(double t, const ekf::UpdateDiagnostics& diag) const;

  PipelineConfig cfg_;
  std::optional<ekf::Ekf> filter_;
  fgo::FactorGraph graph_;
  double last_t_{0.0};
  double current_td_{0.0};
  bool td_solved_once_{false};
};

std::vector<EpochOutput> run_fegut(const std::vector<scene::EpochMeasurements>& epochs,
                                   const PipelineConfig& cfg);

/// The 12-state comparator: the time offset lives in the filter state.
std::vector<EpochOutput> run_baseline_ekf(const std::vector<scene::EpochMeasurements>& epochs,
                                          const PipelineConfig& cfg);

}  // namespace fegut::pipeline
