#include "fegut/fgo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fegut::fgo {

using models::DynamicState;
using models::kDynamicDim;
using models::kFullDim;

// ---------------------------------------------------------------- factors

PriorFactor::PriorFactor(int slot, DynamicState lin_state, double lin_td,
                         Eigen::Matrix<double, 12, 12> sqrt_info,
                         Eigen::Matrix<double, 12, 1> offset)
    : Factor(Kind::Prior, {slot}, true),
      lin_state_(std::move(lin_state)),
      lin_td_(lin_td),
      sqrt_info_(std::move(sqrt_info)),
      offset_(std::move(offset)) {}

std::unique_ptr<PriorFactor> PriorFactor::from_covariance(
    int slot, const DynamicState& mean, double td_mean,
    const Eigen::Matrix<double, 12, 12>& cov) {
  const Eigen::Matrix<double, 12, 12> info =
      cov.ldlt().solve(Eigen::Matrix<double, 12, 12>::Identity());
  const Eigen::LLT<Eigen::Matrix<double, 12, 12>> llt(0.5 * (info + info.transpose()));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("PriorFactor: covariance is not positive definite");
  return std::make_unique<PriorFactor>(slot, mean, td_mean,
                                       Eigen::Matrix<double, 12, 12>(llt.matrixU()),
                                       Eigen::Matrix<double, 12, 1>::Zero());
}

FactorEval PriorFactor::evaluate(const WindowState& w) const {
  Eigen::Matrix<double, 12, 1> delta;
  delta << w.states[static_cast<std::size_t>(slots()[0])] - lin_state_, w.td - lin_td_;

  FactorEval ev;
  ev.residual = sqrt_info_ * delta + offset_;
  ev.jac_states = {sqrt_info_.leftCols<kDynamicDim>()};
  ev.jac_td = sqrt_info_.col(kDynamicDim);
  return ev;
}

PredictionFactor::PredictionFactor(int slot_a, int slot_b, const models::TransitionModel& tm)
    : Factor(Kind::StatePrediction, {slot_a, slot_b}, false),
      f_c_(models::transition_matrix_dynamic(tm.dt)) {
  const Eigen::Matrix<double, 11, 11> q = models::process_noise_cov_dynamic(tm);
  const Eigen::LLT<Eigen::Matrix<double, 11, 11>> llt(q);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        "PredictionFactor: process noise must be positive definite (set jerk/clock PSDs > 0)");
  sqrt_info_ = Eigen::Matrix<double, 11, 11>(llt.matrixL())
                   .triangularView<Eigen::Lower>()
                   .solve(Eigen::Matrix<double, 11, 11>::Identity());
}

FactorEval PredictionFactor::evaluate(const WindowState& w) const {
  const auto& xa = w.states[static_cast<std::size_t>(slots()[0])];
  const auto& xb = w.states[static_cast<std::size_t>(slots()[1])];

  FactorEval ev;
  ev.residual = sqrt_info_ * (xb - f_c_ * xa);
  ev.jac_states = {-sqrt_info_ * f_c_, sqrt_info_};
  return ev;
}

GnssFactor::GnssFactor(int slot, std::vector<scene::SatObs> sats, const scene::NoiseSpec& noise)
    : Factor(Kind::GnssMeasurement, {slot}, false),
      sats_(std::move(sats)),
      sigma_pr_(noise.sigma_pseudorange_m),
      sigma_dop_(noise.sigma_doppler_mps) {
  if (sats_.empty()) throw std::invalid_argument("GnssFactor: no satellites");
}

FactorEval GnssFactor::evaluate(const WindowState& w) const {
  const models::StateVector x =
      models::join_state(w.states[static_cast<std::size_t>(slots()[0])], w.td);
  const auto n = static_cast<int>(sats_.size());

  FactorEval ev;
  ev.residual.resize(2 * n);
  ev.jac_states = {Eigen::MatrixXd::Zero(2 * n, kDynamicDim)};
  for (int i = 0; i < n; ++i) {
    const auto& s = sats_[static_cast<std::size_t>(i)];
    const models::RangeRow pr = models::pseudorange_model(x, s.sat_pos);
    ev.residual(i) = (s.pseudorange - pr.predicted) / sigma_pr_;
    ev.jac_states[0].row(i) = -pr.gradient.head<kDynamicDim>() / sigma_pr_;

    const models::RangeRow dp = models::doppler_model(x, s.sat_pos);
    ev.residual(n + i) = (s.doppler - dp.predicted) / sigma_dop_;
    ev.jac_states[0].row(n + i) = -dp.gradient.head<kDynamicDim>() / sigma_dop_;
  }
  return ev;
}

UwbFactor::UwbFactor(int slot, std::vector<scene::UwbObs> obs, const scene::NoiseSpec& noise)
    : Factor(Kind::UwbMeasurement, {slot}, true), obs_(std::move(obs)), sigma_uwb_(noise.sigma_uwb_m) {
  if (obs_.empty()) throw std::invalid_argument("UwbFactor: no anchors");
}

FactorEval UwbFactor::evaluate(const WindowState& w) const {
  const models::StateVector x =
      models::join_state(w.states[static_cast<std::size_t>(slots()[0])], w.td);
  const auto m = static_cast<int>(obs_.size());

  FactorEval ev;
  ev.residual.resize(m);
  ev.jac_states = {Eigen::MatrixXd::Zero(m, kDynamicDim)};
  ev.jac_td.resize(m);
  for (int j = 0; j < m; ++j) {
    const auto& u = obs_[static_cast<std::size_t>(j)];
    const models::RangeRow ur = models::uwb_model(x, u.anchor_pos);
    ev.residual(j) = (u.range - ur.predicted) / sigma_uwb_;
    ev.jac_states[0].row(j) = -ur.gradient.head<kDynamicDim>() / sigma_uwb_;
    ev.jac_td(j) = -ur.gradient(models::kTimeOffset) / sigma_uwb_;
  }
  return ev;
}

// ------------------------------------------------------------------ graph

FactorGraph::FactorGraph(double initial_td) { window_.td = initial_td; }

void FactorGraph::add_state(double t, const DynamicState& init) {
  if (!window_.timestamps.empty() && t <= window_.timestamps.back())
    throw std::logic_error("FactorGraph::add_state: epochs must be strictly increasing");
  window_.states.push_back(init);
  window_.timestamps.push_back(t);
}

void FactorGraph::add_factor(std::unique_ptr<Factor> f) {
  for (int s : f->slots()) {
    if (s < 0 || s >= size())
      throw std::logic_error("FactorGraph::add_factor: slot out of range");
  }
  factors_.push_back(std::move(f));
}

double FactorGraph::total_cost() const {
  double cost = 0.0;
  for (const auto& f : factors_) cost += 0.5 * f->evaluate(window_).residual.squaredNorm();
  return cost;
}

Eigen::VectorXd FactorGraph::pack() const {
  Eigen::VectorXd v(size() * kDynamicDim + 1);
  for (int s = 0; s < size(); ++s)
    v.segment<kDynamicDim>(s * kDynamicDim) = window_.states[static_cast<std::size_t>(s)];
  v(size() * kDynamicDim) = window_.td;
  return v;
}

void FactorGraph::unpack(const Eigen::VectorXd& v) {
  for (int s = 0; s < size(); ++s)
    window_.states[static_cast<std::size_t>(s)] = v.segment<kDynamicDim>(s * kDynamicDim);
  window_.td = v(size() * kDynamicDim);
}

bool FactorGraph::linearize(Eigen::MatrixXd& jac, Eigen::VectorXd& res,
                            double* meas_td_info) const {
  int rows = 0;
  for (const auto& f : factors_) rows += f->residual_dim();
  const int cols = size() * kDynamicDim + 1;
  const int td_col = cols - 1;

  jac.setZero(rows, cols);
  res.resize(rows);
  if (meas_td_info) *meas_td_info = 0.0;

  int row = 0;
  for (const auto& f : factors_) {
    const FactorEval ev = f->evaluate(window_);
    const int d = f->residual_dim();
    res.segment(row, d) = ev.residual;
    for (std::size_t k = 0; k < f->slots().size(); ++k)
      jac.block(row, f->slots()[k] * kDynamicDim, d, kDynamicDim) = ev.jac_states[k];
    if (f->uses_td()) jac.block(row, td_col, d, 1) = ev.jac_td;
    if (meas_td_info && f->uses_td() && f->kind() != Factor::Kind::Prior)
      *meas_td_info += ev.jac_td.squaredNorm();
    row += d;
  }
  return res.allFinite() && jac.allFinite();
}

SolveReport FactorGraph::solve(const SolverConfig& cfg) {
  SolveReport rep;
  if (size() < 1) {
    rep.message = "empty graph";
    return rep;
  }

  Eigen::MatrixXd jac;
  Eigen::VectorXd res;
  double meas_td_info = 0.0;
  if (!linearize(jac, res, &meas_td_info)) {
    rep.message = "non-finite residual at the initial point";
    return rep;
  }

  // Observability diagnostic: measurement information on td, scaled by the
  // reference prior variance. Below 1 the data say less about td than the
  // cold-start prior, which happens exactly when v and a are ~0 (the td
  // column of the UWB model vanishes).
  rep.td_rank_deficient = meas_td_info * cfg.td_prior_var_ref < 1.0;

  const int cols = static_cast<int>(jac.cols());
  const int td_col = cols - 1;
  double cost = 0.5 * res.squaredNorm();
  rep.initial_cost = cost;
  rep.cost_trajectory.push_back(cost);

  double lambda = cfg.lambda_init;
  Eigen::VectorXd x = pack();
  bool converged = false;
  int iter = 0;

  while (iter < cfg.max_iterations && !converged) {
    ++iter;
    Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * res;
    if (a(td_col, td_col) < cfg.td_diag_floor) a(td_col, td_col) += cfg.td_diag_floor;

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * a.diagonal();
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
      Eigen::VectorXd step;
      bool usable = ldlt.info() == Eigen::Success;
      if (usable) {
        // A rank-deficient system can still yield a finite "solution" when g
        // lies in the column space; the pivots expose it.
        const Eigen::VectorXd d = ldlt.vectorD();
        usable = d.minCoeff() > 1e-12 * d.maxCoeff() && d.maxCoeff() > 0.0;
      }
      if (usable) {
        step = ldlt.solve(-g);
        usable = step.allFinite() &&
                 (damped * step + g).norm() <= 1e-8 * (g.norm() + 1.0);
      }
      if (!usable) {
        if (lambda == 0.0) lambda = cfg.lambda_init > 0 ? cfg.lambda_init : 1e-6;
        lambda *= cfg.lambda_up;
        if (lambda > 1e12) {
          rep.message = "normal equations singular (td unobservable at zero velocity?)";
          unpack(x);
          return rep;
        }
        continue;
      }

      const Eigen::VectorXd x_try = x + step;
      unpack(x_try);
      Eigen::MatrixXd jac_try;
      Eigen::VectorXd res_try;
      if (!linearize(jac_try, res_try, nullptr)) {
        unpack(x);
        lambda = std::max(lambda, 1e-8) * cfg.lambda_up;
        if (lambda > 1e12) {
          rep.message = "non-finite residual during line search";
          return rep;
        }
        continue;
      }
      const double cost_try = 0.5 * res_try.squaredNorm();
      if (cost_try <= cost) {
        accepted = true;
        const bool small_decrease = (cost - cost_try) <= cfg.cost_tol_rel * std::max(cost, 1e-300);
        const bool small_step = step.lpNorm<Eigen::Infinity>() < cfg.step_tol;
        x = x_try;
        cost = cost_try;
        jac.swap(jac_try);
        res.swap(res_try);
        rep.cost_trajectory.push_back(cost);
        lambda /= cfg.lambda_down;
        if (small_decrease || small_step) converged = true;
      } else {
        unpack(x);
        if (lambda == 0.0) lambda = cfg.lambda_init > 0 ? cfg.lambda_init : 1e-6;
        lambda *= cfg.lambda_up;
        if (lambda > 1e12) {
          // Cannot improve; treat the current point as converged.
          accepted = true;
          converged = true;
        }
      }
    }
  }

  unpack(x);
  rep.ok = true;
  rep.converged = converged;
  rep.iterations = iter;
  rep.final_cost = cost;

  // Marginal td std from the final normal equations.
  {
    Eigen::MatrixXd a = jac.transpose() * jac;
    if (a(td_col, td_col) < cfg.td_diag_floor) a(td_col, td_col) += cfg.td_diag_floor;
    Eigen::VectorXd e_td = Eigen::VectorXd::Zero(cols);
    e_td(td_col) = 1.0;
    const Eigen::VectorXd col = a.ldlt().solve(e_td);
    td_std_ = col(td_col) > 0 ? std::sqrt(col(td_col)) : 0.0;
  }
  solved_once_ = true;

  if (cfg.debug_stream) {
    auto& os = *cfg.debug_stream;
    os << "{\"states\":" << size() << ",\"td\":" << window_.td << ",\"factors\":[";
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      static const char* names[] = {"prior", "prediction", "gnss", "uwb", "custom"};
      os << (i ? "," : "") << "{\"kind\":\"" << names[static_cast<int>(factors_[i]->kind())]
         << "\",\"dim\":" << factors_[i]->residual_dim() << "}";
    }
    os << "],\"cost\":[";
    for (std::size_t i = 0; i < rep.cost_trajectory.size(); ++i)
      os << (i ? "," : "") << rep.cost_trajectory[i];
    os << "]}\n";
  }
  return rep;
}

MarginalizationReport FactorGraph::marginalize_oldest() {
  if (size() < 2) throw std::logic_error("marginalize_oldest: need at least two states");
  if (oldest_marginalized_) throw std::logic_error("marginalize_oldest: already marginalized");

  // Partition factors into those touching slot 0 and the rest.
  std::vector<std::unique_ptr<Factor>> touching, keep;
  for (auto& f : factors_) {
    const auto& s = f->slots();
    if (std::find(s.begin(), s.end(), 0) != s.end())
      touching.push_back(std::move(f));
    else
      keep.push_back(std::move(f));
  }
  if (touching.empty()) throw std::logic_error("marginalize_oldest: oldest state has no factors");

  // The eliminated block is slot 0; retained variables must be exactly
  // (slot 1, td) for the chain topology used here.
  for (const auto& f : touching) {
    for (int s : f->slots()) {
      if (s > 1)
        throw std::logic_error("marginalize_oldest: factor skips over the adjacent state");
    }
  }

  // Joint information over [slot0(11) | slot1(11) td(1)] from a linearization
  // at the current estimate (first-estimates convention: this point freezes).
  constexpr int kA = kDynamicDim;          // eliminated
  constexpr int kB = kDynamicDim + 1;      // retained
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(kA + kB, kA + kB);
  Eigen::VectorXd gvec = Eigen::VectorXd::Zero(kA + kB);

  for (const auto& f : touching) {
    const FactorEval ev = f->evaluate(window_);
    const int d = f->residual_dim();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(d, kA + kB);
    for (std::size_t k = 0; k < f->slots().size(); ++k) {
      const int offset = f->slots()[k] == 0 ? 0 : kA;
      j.block(0, offset, d, kDynamicDim) = ev.jac_states[k];
    }
    if (f->uses_td()) j.col(kA + kDynamicDim) = ev.jac_td;
    lambda.noalias() += j.transpose() * j;
    gvec.noalias() += j.transpose() * ev.residual;
  }

  MarginalizationReport rep;
  Eigen::Matrix<double, kA, kA> laa = lambda.topLeftCorner<kA, kA>();
  Eigen::LDLT<Eigen::Matrix<double, kA, kA>> ldlt(laa);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
    laa += 1e-9 * Eigen::Matrix<double, kA, kA>::Identity();
    ldlt.compute(laa);
    rep.regularized = true;
  }

  const Eigen::MatrixXd lab = lambda.topRightCorner(kA, kB);
  const Eigen::MatrixXd lba_laainv = ldlt.solve(lab).transpose();  // (Laa^-1 Lab)^T
  Eigen::MatrixXd lambda_marg = lambda.bottomRightCorner(kB, kB) - lba_laainv * lab;
  Eigen::VectorXd g_marg = gvec.tail(kB) - lba_laainv * gvec.head(kA);
  lambda_marg = 0.5 * (lambda_marg + lambda_marg.transpose()).eval();

  // Express as a square-root prior: U^T U = Lambda, U^T offset = g.
  Eigen::LLT<Eigen::MatrixXd> llt(lambda_marg);
  if (llt.info() != Eigen::Success) {
    lambda_marg += 1e-12 * Eigen::MatrixXd::Identity(kB, kB);
    llt.compute(lambda_marg);
    rep.regularized = true;
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("marginalize_oldest: marginal information not PSD");
  }
  const Eigen::Matrix<double, 12, 12> sqrt_info = llt.matrixU();
  const Eigen::Matrix<double, 12, 1> offset =
      sqrt_info.transpose().triangularView<Eigen::Lower>().solve(g_marg);

  factors_ = std::move(keep);
  factors_.push_back(std::make_unique<PriorFactor>(1, window_.states[1], window_.td, sqrt_info,
                                                   offset));
  oldest_marginalized_ = true;
  return rep;
}

void FactorGraph::slide() {
  if (!oldest_marginalized_) throw std::logic_error("slide: marginalize the oldest state first");
  window_.states.erase(window_.states.begin());
  window_.timestamps.erase(window_.timestamps.begin());
  for (auto& f : factors_) f->shift_slots(-1);
  oldest_marginalized_ = false;
}

double FactorGraph::current_td() const {
  if (!solved_once_) throw std::logic_error("current_td: no solve completed yet");
  return window_.td;
}

double FactorGraph::current_td_std() const {
  if (!solved_once_) throw std::logic_error("current_td_std: no solve completed yet");
  return td_std_;
}

void add_epoch(FactorGraph& graph, const scene::EpochMeasurements& epoch,
               const DynamicState& init, const models::TransitionModel& tm,
               const scene::NoiseSpec& noise) {
  const int prev = graph.size() - 1;
  const double t_prev = prev >= 0 ? graph.window().timestamps.back() : 0.0;
  graph.add_state(epoch.t, init);
  if (prev >= 0) {
    models::TransitionModel step = tm;
    step.dt = epoch.t - t_prev;
    graph.add_factor(std::make_unique<PredictionFactor>(prev, prev + 1, step));
  }
  if (!epoch.sats.empty())
    graph.add_factor(std::make_unique<GnssFactor>(prev + 1, epoch.sats, noise));
  if (!epoch.uwb.empty())
    graph.add_factor(std::make_unique<UwbFactor>(prev + 1, epoch.uwb, noise));
}

}  // namespace fegut::fgo
