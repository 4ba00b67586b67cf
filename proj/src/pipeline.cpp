#include "fegut/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include "fegut/errors.hpp"

namespace fegut::pipeline {

using models::DynamicState;
using models::StateVector;

ColdStartFix cold_start(const scene::EpochMeasurements& epoch) {
  const auto n = static_cast<int>(epoch.sats.size());
  if (n < 4)
    throw ColdStartError("cold start needs at least 4 satellites, got " + std::to_string(n));

  ColdStartFix fix;
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  double bias = 0.0;

  Eigen::MatrixXd jac(n, 4);
  Eigen::VectorXd rhs(n);
  for (int it = 0; it < 20; ++it) {
    for (int i = 0; i < n; ++i) {
      const auto& s = epoch.sats[static_cast<std::size_t>(i)];
      const Eigen::Vector3d diff = s.sat_pos - r;
      const double rho = diff.norm();
      jac.row(i) << (-diff / rho).transpose(), 1.0;
      rhs(i) = s.pseudorange - (rho + bias);
    }
    const Eigen::Vector4d step = (jac.transpose() * jac).ldlt().solve(jac.transpose() * rhs);
    r += step.head<3>();
    bias += step(3);
    fix.iterations = it + 1;
    if (step.norm() < 1e-9) break;
  }

  // Doppler is linear in (v, drift) once the geometry is fixed.
  for (int i = 0; i < n; ++i) {
    const auto& s = epoch.sats[static_cast<std::size_t>(i)];
    const Eigen::Vector3d los = (s.sat_pos - r).normalized();
    jac.row(i) << (-los).transpose(), 1.0;
    rhs(i) = s.doppler;
  }
  const Eigen::Vector4d vel_fix = (jac.transpose() * jac).ldlt().solve(jac.transpose() * rhs);

  fix.r = r;
  fix.clock_bias = bias;
  fix.v = vel_fix.head<3>();
  fix.clock_drift = vel_fix(3);
  return fix;
}

namespace {

StateVector state_from_fix(const ColdStartFix& fix, double td) {
  StateVector x = StateVector::Zero();
  x.segment<3>(models::kPos) = fix.r;
  x.segment<3>(models::kVel) = fix.v;
  x(models::kClockBias) = fix.clock_bias;
  x(models::kClockDrift) = fix.clock_drift;
  x(models::kTimeOffset) = td;
  return x;
}

Eigen::Matrix<double, 12, 12> prior_covariance(const ekf::EkfConfig& cfg) {
  // Window-variable order (11 dynamic + td) matches the state layout, so the
  // diagonal carries over directly.
  return cfg.initial_cov_diag.asDiagonal();
}

EpochOutput cold_start_placeholder(double t, const std::string& why) {
  EpochOutput out;
  out.t = t;
  out.source = OutputSource::ColdStart;
  out.has_fix = false;
  out.warning = why;
  return out;
}

}  // namespace

FegutPipeline::FegutPipeline(const PipelineConfig& cfg) : cfg_(cfg), graph_(cfg.initial_td) {
  if (cfg.feedback == FeedbackMode::Damped &&
      (cfg.feedback_alpha <= 0.0 || cfg.feedback_alpha > 1.0))
    throw ConfigError("feedback alpha must be in (0, 1]");
  if (cfg.solver.window_size < 2) throw ConfigError("window size must be at least 2");
  current_td_ = cfg.initial_td;
}

void FegutPipeline::trace_filter(double t, const ekf::UpdateDiagnostics& diag) const {
  if (!cfg_.ekf_state_trace) return;
  if (cfg_.ekf_state_trace->empty())
    *cfg_.ekf_state_trace = ekf::state_trace_header(filter_->dim());
  ekf::append_state_trace(*cfg_.ekf_state_trace, t, *filter_, diag);
}

EpochOutput FegutPipeline::output_from_filter(const scene::EpochMeasurements& epoch,
                                              OutputSource source) const {
  EpochOutput out;
  out.t = epoch.t;
  out.source = source;
  const Eigen::VectorXd& mean = filter_->mean();
  out.r = mean.segment<3>(models::kPos);
  out.v = mean.segment<3>(models::kVel);
  out.clock_bias = mean(models::kClockBias);
  out.clock_drift = mean(models::kClockDrift);
  out.td = current_td_;
  return out;
}

EpochOutput FegutPipeline::step(const scene::EpochMeasurements& epoch) {
  if (!filter_) {
    if (epoch.kind != scene::EpochKind::GnssAndUwb || epoch.sats.size() < 4)
      return cold_start_placeholder(epoch.t, "awaiting first GNSS fix");

    const ColdStartFix fix = cold_start(epoch);
    const StateVector x0 = state_from_fix(fix, cfg_.initial_td);
    filter_.emplace(ekf::FilterMode::Naive11, cfg_.ekf, x0);

    graph_.add_state(epoch.t, x0.head<models::kDynamicDim>());
    graph_.add_factor(fgo::PriorFactor::from_covariance(
        0, x0.head<models::kDynamicDim>(), cfg_.initial_td, prior_covariance(cfg_.ekf)));
    last_t_ = epoch.t;
    return output_from_filter(epoch, OutputSource::ColdStart);
  }

  if (epoch.t <= last_t_)
    throw std::logic_error("pipeline: epochs must arrive in strictly increasing time order");
  filter_->predict(epoch.t - last_t_);
  last_t_ = epoch.t;

  if (epoch.kind == scene::EpochKind::UwbOnly) {
    const ekf::UpdateDiagnostics diag = filter_->partial_update(epoch);
    trace_filter(epoch.t, diag);
    EpochOutput out = output_from_filter(epoch, OutputSource::EkfOnly);
    if (!diag.ok) out.warning = diag.message;
    return out;
  }

  const ekf::UpdateDiagnostics diag = filter_->update(epoch);
  trace_filter(epoch.t, diag);

  // The graph only sees GNSS epochs; the filter posterior initializes the new
  // state (Algorithm step: factor graph optimization with EKF-initialized
  // states, then marginalization, sliding and time-offset feedback).
  fgo::add_epoch(graph_, epoch, filter_->mean(), cfg_.ekf.transition,
                 cfg_.ekf.measurement_noise);

  fgo::SolveReport rep;
  if (cfg_.debug_force_solver_failure) {
    rep.ok = false;
    rep.message = "forced solver failure (test hook)";
  } else {
    rep = graph_.solve(cfg_.solver);
  }

  if (graph_.size() >= cfg_.solver.window_size) {
    graph_.marginalize_oldest();
    graph_.slide();
  }

  EpochOutput out;
  if (rep.ok) {
    const double fgo_td = graph_.current_td();
    if (cfg_.feedback == FeedbackMode::Damped && td_solved_once_)
      current_td_ = cfg_.feedback_alpha * fgo_td + (1.0 - cfg_.feedback_alpha) * current_td_;
    else
      current_td_ = fgo_td;
    td_solved_once_ = true;
    filter_->set_external_td(current_td_);

    out = output_from_filter(epoch, OutputSource::Hybrid);
    out.fgo_cost = rep.final_cost;
    out.fgo_iterations = rep.iterations;
    out.fgo_td_std = graph_.current_td_std();
    out.fgo_td_rank_deficient = rep.td_rank_deficient;
    if (rep.td_rank_deficient)
      out.warning = "td observability low: measurement information below prior";
  } else {
    out = output_from_filter(epoch, OutputSource::EkfFallback);
    out.warning = rep.message.empty() ? "fgo solve failed" : rep.message;
  }
  if (!diag.ok) out.warning += (out.warning.empty() ? "" : "; ") + diag.message;
  return out;
}

std::vector<EpochOutput> run_fegut(const std::vector<scene::EpochMeasurements>& epochs,
                                   const PipelineConfig& cfg) {
  FegutPipeline pipeline(cfg);
  std::vector<EpochOutput> out;
  out.reserve(epochs.size());
  for (const auto& e : epochs) out.push_back(pipeline.step(e));
  return out;
}

std::vector<EpochOutput> run_baseline_ekf(const std::vector<scene::EpochMeasurements>& epochs,
                                          const PipelineConfig& cfg) {
  std::vector<EpochOutput> out;
  out.reserve(epochs.size());

  std::optional<ekf::Ekf> filter;
  double last_t = 0.0;
  for (const auto& e : epochs) {
    if (!filter) {
      if (e.kind != scene::EpochKind::GnssAndUwb || e.sats.size() < 4) {
        out.push_back(cold_start_placeholder(e.t, "awaiting first GNSS fix"));
        continue;
      }
      const ColdStartFix fix = cold_start(e);
      filter.emplace(ekf::FilterMode::Tdtssm12, cfg.ekf, state_from_fix(fix, cfg.initial_td));
      last_t = e.t;
      EpochOutput o;
      o.t = e.t;
      o.source = OutputSource::ColdStart;
      o.r = fix.r;
      o.v = fix.v;
      o.clock_bias = fix.clock_bias;
      o.clock_drift = fix.clock_drift;
      o.td = cfg.initial_td;
      out.push_back(o);
      continue;
    }

    if (e.t <= last_t)
      throw std::logic_error("baseline ekf: epochs must arrive in increasing time order");
    filter->predict(e.t - last_t);
    last_t = e.t;
    const ekf::UpdateDiagnostics diag = filter->update(e);
    if (cfg.ekf_state_trace) {
      if (cfg.ekf_state_trace->empty()) *cfg.ekf_state_trace = ekf::state_trace_header(filter->dim());
      ekf::append_state_trace(*cfg.ekf_state_trace, e.t, *filter, diag);
    }

    EpochOutput o;
    o.t = e.t;
    o.source = OutputSource::EkfOnly;
    const Eigen::VectorXd& mean = filter->mean();
    o.r = mean.segment<3>(models::kPos);
    o.v = mean.segment<3>(models::kVel);
    o.clock_bias = mean(models::kClockBias);
    o.clock_drift = mean(models::kClockDrift);
    o.td = mean(models::kTimeOffset);
    if (!diag.ok) o.warning = diag.message;
    out.push_back(o);
  }
  return out;
}

}  // namespace fegut::pipeline
