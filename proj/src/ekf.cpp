#include "fegut/ekf.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fegut::ekf {
namespace {

// Wilson-Hilferty chi-square quantile with an Abramowitz-Stegun normal
// quantile for the upper tail; plenty for an outlier gate.
double chi2_quantile(double confidence, int dof) {
  const double q = std::sqrt(-2.0 * std::log(1.0 - confidence));
  const double z = q - (2.515517 + 0.802853 * q + 0.010328 * q * q) /
                           (1.0 + 1.432788 * q + 0.189269 * q * q + 0.001308 * q * q * q);
  const double k = static_cast<double>(dof);
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

}  // namespace

Ekf::Ekf(FilterMode mode, const EkfConfig& cfg, const models::StateVector& initial_mean)
    : mode_(mode),
      dim_(mode == FilterMode::Tdtssm12 ? models::kFullDim : models::kDynamicDim),
      cfg_(cfg) {
  mean_ = initial_mean.head(dim_);
  cov_ = cfg.initial_cov_diag.head(dim_).asDiagonal();
  if (mode_ == FilterMode::Naive11) external_td_ = initial_mean(models::kTimeOffset);
}

void Ekf::predict(double dt) {
  if (dt <= 0.0) throw std::invalid_argument("Ekf::predict: dt must be positive");
  models::TransitionModel m = cfg_.transition;
  m.dt = dt;
  if (mode_ == FilterMode::Tdtssm12) {
    const auto f = models::transition_matrix(dt);
    mean_ = f * mean_;
    cov_ = f * cov_ * f.transpose() + models::process_noise_cov(m);
  } else {
    const auto f = models::transition_matrix_dynamic(dt);
    mean_ = f * mean_;
    cov_ = f * cov_ * f.transpose() + models::process_noise_cov_dynamic(m);
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

UpdateDiagnostics Ekf::update(const scene::EpochMeasurements& epoch) {
  UpdateDiagnostics diag;
  if (epoch.sats.empty() && epoch.uwb.empty()) {
    diag.ok = false;
    diag.message = "empty epoch";
    return diag;
  }

  const models::StateVector x_full = full_state();
  const models::MeasurementModel mm =
      models::assemble_measurement(x_full, epoch, cfg_.measurement_noise);
  diag.rows = static_cast<int>(mm.predicted.size());

  // In naive mode the time-offset column is dropped; the offset still shapes
  // the predicted UWB range through full_state().
  const Eigen::MatrixXd h = mm.jacobian.leftCols(dim_);
  const Eigen::VectorXd innovation = mm.measured - mm.predicted;
  const Eigen::MatrixXd r_cov = mm.noise_std.array().square().matrix().asDiagonal();

  const Eigen::MatrixXd s = h * cov_ * h.transpose() + r_cov;
  const Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    diag.ok = false;
    diag.message = "innovation covariance not positive definite";
    return diag;
  }

  diag.innovation_norm = innovation.norm();
  diag.innovation_chi2 = innovation.dot(llt.solve(innovation));
  if (cfg_.innovation_gate && diag.innovation_chi2 > chi2_quantile(cfg_.gate_confidence, diag.rows)) {
    diag.gated = true;
    return diag;
  }

  const Eigen::MatrixXd k = llt.solve(h * cov_).transpose();  // P H^T S^-1
  mean_ += k * innovation;

  // Joseph form, then symmetrize.
  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(dim_, dim_) - k * h;
  cov_ = ikh * cov_ * ikh.transpose() + k * r_cov * k.transpose();
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  return diag;
}

UpdateDiagnostics Ekf::partial_update(const scene::EpochMeasurements& epoch) {
  if (epoch.kind != scene::EpochKind::UwbOnly)
    throw std::logic_error("partial_update requires a UWB-only epoch");
  return update(epoch);
}

void Ekf::set_external_td(double td) {
  if (mode_ != FilterMode::Naive11)
    throw std::logic_error("set_external_td is only valid in Naive11 mode");
  external_td_ = td;
}

double Ekf::external_td() const {
  if (mode_ != FilterMode::Naive11)
    throw std::logic_error("external_td is only tracked in Naive11 mode");
  return external_td_;
}

models::StateVector Ekf::full_state() const {
  models::StateVector x = models::StateVector::Zero();
  x.head(dim_) = mean_;
  if (mode_ == FilterMode::Naive11) x(models::kTimeOffset) = external_td_;
  return x;
}

void Ekf::set_mean(const Eigen::VectorXd& mean) {
  if (mean.size() != dim_) throw std::invalid_argument("Ekf::set_mean: dimension mismatch");
  mean_ = mean;
}

void Ekf::set_covariance(const Eigen::MatrixXd& cov) {
  if (cov.rows() != dim_ || cov.cols() != dim_)
    throw std::invalid_argument("Ekf::set_covariance: dimension mismatch");
  cov_ = 0.5 * (cov + cov.transpose());
}

std::string state_trace_header(int dim) {
  std::string h = "t";
  for (int i = 0; i < dim; ++i) h += ",x" + std::to_string(i);
  for (int i = 0; i < dim; ++i) h += ",p" + std::to_string(i);
  h += ",innovation_norm\n";
  return h;
}

void append_state_trace(std::string& csv, double t, const Ekf& filter,
                        const UpdateDiagnostics& diag) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  csv += buf;
  for (int i = 0; i < filter.dim(); ++i) {
    std::snprintf(buf, sizeof buf, ",%.17g", filter.mean()(i));
    csv += buf;
  }
  for (int i = 0; i < filter.dim(); ++i) {
    std::snprintf(buf, sizeof buf, ",%.17g", filter.covariance()(i, i));
    csv += buf;
  }
  std::snprintf(buf, sizeof buf, ",%.17g\n", diag.innovation_norm);
  csv += buf;
}

}  // namespace fegut::ekf
