#pragma once

#include <string>
#include <vector>

#include "fegut/geodesy.hpp"
#include "fegut/pipeline.hpp"
#include "fegut/trajectory.hpp"

namespace fegut::eval {

struct RunReport {
  // After the convergence cut.
  double horizontal_rmse{0.0};  // [m]
  double vertical_rmse{0.0};    // [m]
  double td_rmse_ms{0.0};
  double east_rmse{0.0}, north_rmse{0.0}, up_rmse{0.0};
  // Without the cut (transients included).
  double horizontal_rmse_full{0.0};
  double vertical_rmse_full{0.0};
  double td_rmse_ms_full{0.0};
  int epochs_used{0};
  double convergence_cut_s{10.0};
  uint64_t seed{0};
  std::string config_hash;
};

/// Error decomposition is done in the ENU frame at the trajectory origin.
/// Truth is interpolated at every output timestamp; outputs without a fix
/// are skipped. Throws std::out_of_range if an output timestamp leaves the
/// truth span.
RunReport compute_rmse(const std::vector<pipeline::EpochOutput>& outputs,
                       const traj::TruthTable& truth, const geo::GeodeticCoord& origin,
                       double td_true_s, double convergence_cut_s);

/// (baseline - candidate) / baseline * 100.
double enhancement_percent(double baseline, double candidate);

struct Comparison {
  RunReport baseline;   // EKF
  RunReport candidate;  // FE-GUT
  double enhancement_horizontal{0.0};
  double enhancement_vertical{0.0};
  double enhancement_td{0.0};
};

Comparison compare(const RunReport& baseline, const RunReport& candidate);

const char* source_name(pipeline::OutputSource s);

void write_trace_csv(const std::string& path, const std::vector<pipeline::EpochOutput>& outputs,
                     const geo::EnuFrame& frame);
std::vector<pipeline::EpochOutput> read_trace_csv(const std::string& path);

void write_report_csv(const std::string& path, const std::vector<Comparison>& rows);
std::string format_report_table(const Comparison& c);

/// Plot-ready exports: one row per trace epoch.
void write_plotdata_position(const std::string& path,
                             const std::vector<pipeline::EpochOutput>& ekf,
                             const std::vector<pipeline::EpochOutput>& fegut,
                             const traj::TruthTable& truth, const geo::EnuFrame& frame);
void write_plotdata_td(const std::string& path, const std::vector<pipeline::EpochOutput>& ekf,
                       const std::vector<pipeline::EpochOutput>& fegut, double td_true_s);
void write_plotdata_trajectory(const std::string& path,
                               const std::vector<pipeline::EpochOutput>& ekf,
                               const std::vector<pipeline::EpochOutput>& fegut,
                               const traj::TruthTable& truth, const geo::EnuFrame& frame);

}  // namespace fegut::eval
