#pragma once

#include <string>

#include <Eigen/Dense>

#include "fegut/models.hpp"

namespace fegut::ekf {

enum class FilterMode {
  Tdtssm12,  // full 12-state filter, time offset estimated in-state
  Naive11    // 11-state filter, time offset supplied externally
};

struct EkfConfig {
  models::TransitionModel transition;  // td_psd only acts in Tdtssm12 mode
  scene::NoiseSpec measurement_noise;
  // Generous cold-start covariance diagonal in state order.
  Eigen::Matrix<double, models::kFullDim, 1> initial_cov_diag{
      (Eigen::Matrix<double, models::kFullDim, 1>() << 100, 100, 100, 1, 1, 1, 0.1, 0.1, 0.1,
       100, 1, 1e-2)
          .finished()};
  bool innovation_gate{false};
  double gate_confidence{0.999};
};

struct UpdateDiagnostics {
  bool ok{true};
  bool gated{false};
  int rows{0};
  double innovation_norm{0.0};
  double innovation_chi2{0.0};
  std::string message;
};

/// Value-semantic extended Kalman filter over the shared state layout.
/// Covariance updates use the Joseph form and are re-symmetrized.
class Ekf {
 public:
  Ekf(FilterMode mode, const EkfConfig& cfg, const models::StateVector& initial_mean);

  void predict(double dt);

  /// General or partial (UWB-only) update, dispatched on the epoch kind.
  /// On a numerical failure the state is left unchanged and ok=false.
  UpdateDiagnostics update(const scene::EpochMeasurements& epoch);

  /// Contract-checked wrapper for UWB-only epochs.
  UpdateDiagnostics partial_update(const scene::EpochMeasurements& epoch);

  /// Naive11 only: replace the externally calibrated time offset.
  void set_external_td(double td);
  double external_td() const;

  FilterMode mode() const { return mode_; }
  int dim() const { return dim_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  /// Full 12-dim view; in Naive11 mode the external offset fills the tail.
  models::StateVector full_state() const;

  /// Mean/covariance in place (tests, cold-start shaping).
  void set_mean(const Eigen::VectorXd& mean);
  void set_covariance(const Eigen::MatrixXd& cov);

 private:
  FilterMode mode_;
  int dim_;
  EkfConfig cfg_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  double external_td_{0.0};
};

/// State trace row export (CSV: t, mean, covariance diagonal, innovation norm).
void append_state_trace(std::string& csv, double t, const Ekf& filter,
                        const UpdateDiagnostics& diag);
std::string state_trace_header(int dim);

}  // namespace fegut::ekf
