#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fegut/models.hpp"

namespace fegut::fgo {

/// Sliding-window variables: p time-varying 11-dim states plus one shared
/// time-offset scalar for the whole window.
struct WindowState {
  std::vector<models::DynamicState> states;
  std::vector<double> timestamps;
  double td{0.0};
};

/// Whitened residual and Jacobians of one factor at a given window value.
struct FactorEval {
  Eigen::VectorXd residual;
  std::vector<Eigen::MatrixXd> jac_states;  // one block per connected state slot
  Eigen::VectorXd jac_td;                   // empty unless the factor uses td
};

class Factor {
 public:
  enum class Kind { Prior, StatePrediction, GnssMeasurement, UwbMeasurement, Custom };

  Factor(Kind kind, std::vector<int> slots, bool uses_td)
      : kind_(kind), slots_(std::move(slots)), uses_td_(uses_td) {}
  virtual ~Factor() = default;

  virtual FactorEval evaluate(const WindowState& w) const = 0;
  virtual int residual_dim() const = 0;

  Kind kind() const { return kind_; }
  const std::vector<int>& slots() const { return slots_; }
  bool uses_td() const { return uses_td_; }
  void shift_slots(int delta) {
    for (int& s : slots_) s += delta;
  }

 private:
  Kind kind_;
  std::vector<int> slots_;
  bool uses_td_;
};

/// Joint Gaussian prior over (one state slot, td), stored in square-root form:
/// residual = sqrt_info * [x - lin_state; td - lin_td] + offset.
/// Marginalization produces these with a nonzero offset; the linearization
/// point stays frozen afterwards.
class PriorFactor final : public Factor {
 public:
  PriorFactor(int slot, models::DynamicState lin_state, double lin_td,
              Eigen::Matrix<double, 12, 12> sqrt_info, Eigen::Matrix<double, 12, 1> offset);

  /// Build from a mean and covariance (cold start).
  static std::unique_ptr<PriorFactor> from_covariance(int slot,
                                                      const models::DynamicState& mean,
                                                      double td_mean,
                                                      const Eigen::Matrix<double, 12, 12>& cov);

  FactorEval evaluate(const WindowState& w) const override;
  int residual_dim() const override { return 12; }

  const models::DynamicState& lin_state() const { return lin_state_; }
  double lin_td() const { return lin_td_; }
  const Eigen::Matrix<double, 12, 12>& sqrt_info() const { return sqrt_info_; }

 private:
  models::DynamicState lin_state_;
  double lin_td_;
  Eigen::Matrix<double, 12, 12> sqrt_info_;
  Eigen::Matrix<double, 12, 1> offset_;
};

/// Binary constant-acceleration prediction factor between consecutive states:
/// residual = Q^{-1/2} (x_b - F_c x_a).
class PredictionFactor final : public Factor {
 public:
  PredictionFactor(int slot_a, int slot_b, const models::TransitionModel& tm);

  FactorEval evaluate(const WindowState& w) const override;
  int residual_dim() const override { return models::kDynamicDim; }

 private:
  Eigen::Matrix<double, 11, 11> f_c_;
  Eigen::Matrix<double, 11, 11> sqrt_info_;
};

/// Pseudorange + Doppler factor for one epoch; connects a single state and is
/// structurally independent of td.
class GnssFactor final : public Factor {
 public:
  GnssFactor(int slot, std::vector<scene::SatObs> sats, const scene::NoiseSpec& noise);

  FactorEval evaluate(const WindowState& w) const override;
  int residual_dim() const override { return 2 * static_cast<int>(sats_.size()); }

 private:
  std::vector<scene::SatObs> sats_;
  double sigma_pr_, sigma_dop_;
};

/// UWB range factor; couples one state with the shared td.
class UwbFactor final : public Factor {
 public:
  UwbFactor(int slot, std::vector<scene::UwbObs> obs, const scene::NoiseSpec& noise);

  FactorEval evaluate(const WindowState& w) const override;
  int residual_dim() const override { return static_cast<int>(obs_.size()); }

 private:
  std::vector<scene::UwbObs> obs_;
  double sigma_uwb_;
};

struct SolverConfig {
  int window_size{10};
  int max_iterations{25};
  double lambda_init{1e-4};
  double lambda_up{10.0};
  double lambda_down{10.0};
  double cost_tol_rel{1e-10};
  double step_tol{1e-14};
  double td_diag_floor{1e-9};
  /// Reference td prior variance for the observability diagnostic below.
  double td_prior_var_ref{1e-2};
  std::ostream* debug_stream{nullptr};
};

struct SolveReport {
  bool ok{false};
  bool converged{false};
  int iterations{0};
  double initial_cost{0.0};
  double final_cost{0.0};
  /// Measurement information on td is negligible against the prior
  /// (e.g. zero-velocity motion makes the td column vanish).
  bool td_rank_deficient{false};
  std::string message;
  std::vector<double> cost_trajectory;
};

struct MarginalizationReport {
  bool regularized{false};
};

/// Dense damped Gauss-Newton over the window. Cost is 0.5 * sum of squared
/// whitened residuals.
class FactorGraph {
 public:
  explicit FactorGraph(double initial_td = 0.0);

  int size() const { return static_cast<int>(window_.states.size()); }
  const WindowState& window() const { return window_; }
  WindowState& mutable_window() { return window_; }
  const std::vector<std::unique_ptr<Factor>>& factors() const { return factors_; }

  /// Appends a state; throws std::logic_error on out-of-order timestamps.
  void add_state(double t, const models::DynamicState& init);
  void add_factor(std::unique_ptr<Factor> f);

  double total_cost() const;
  SolveReport solve(const SolverConfig& cfg);

  /// Schur-complement elimination of the oldest state. Factors touching it
  /// are linearized at the current estimate and replaced by a joint prior
  /// over (next state, td). Requires >= 2 states.
  MarginalizationReport marginalize_oldest();

  /// Drops the (already marginalized) oldest slot and shifts indices.
  void slide();

  /// Shared time-offset estimate and marginal std from the last solve.
  /// Throws std::logic_error before the first successful solve.
  double current_td() const;
  double current_td_std() const;

 private:
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& v);
  // Stacks all factors at the current window value. Returns false if any
  // residual is non-finite.
  bool linearize(Eigen::MatrixXd& jac, Eigen::VectorXd& res, double* meas_td_info) const;

  WindowState window_;
  std::vector<std::unique_ptr<Factor>> factors_;
  bool oldest_marginalized_{false};
  bool solved_once_{false};
  double td_std_{0.0};
};

/// One Algorithm-style graph extension: append a state initialized from the
/// filter, a prediction factor to its predecessor, and the epoch's
/// measurement factors.
void add_epoch(FactorGraph& graph, const scene::EpochMeasurements& epoch,
               const models::DynamicState& init, const models::TransitionModel& tm,
               const scene::NoiseSpec& noise);

}  // namespace fegut::fgo
