#include "fegut/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fegut/errors.hpp"

namespace fegut::eval {
namespace {

struct Accumulator {
  double ee{0}, nn{0}, uu{0}, td{0};
  int count{0};

  void add(const Eigen::Vector3d& enu_err, double td_err) {
    ee += enu_err.x() * enu_err.x();
    nn += enu_err.y() * enu_err.y();
    uu += enu_err.z() * enu_err.z();
    td += td_err * td_err;
    ++count;
  }
};

}  // namespace

RunReport compute_rmse(const std::vector<pipeline::EpochOutput>& outputs,
                       const traj::TruthTable& truth, const geo::GeodeticCoord& origin,
                       double td_true_s, double convergence_cut_s) {
  if (outputs.empty()) throw std::invalid_argument("compute_rmse: no outputs");

  const geo::EnuFrame frame(origin);
  double t_first = 0.0;
  bool have_first = false;

  Accumulator cut, full;
  for (const auto& o : outputs) {
    if (!o.has_fix) continue;
    if (!have_first) {
      t_first = o.t;
      have_first = true;
    }
    const traj::MotionSample s = truth.sample(o.t);
    const Eigen::Vector3d enu_err = frame.rotate_to_enu(o.r - s.r);
    const double td_err_ms = (o.td - td_true_s) * 1e3;
    full.add(enu_err, td_err_ms);
    if (o.t >= t_first + convergence_cut_s) cut.add(enu_err, td_err_ms);
  }
  if (cut.count == 0)
    throw std::invalid_argument("compute_rmse: no epochs past the convergence cut");

  const auto rms = [](double acc, int n) { return std::sqrt(acc / n); };
  RunReport r;
  r.east_rmse = rms(cut.ee, cut.count);
  r.north_rmse = rms(cut.nn, cut.count);
  r.up_rmse = rms(cut.uu, cut.count);
  r.horizontal_rmse = rms(cut.ee + cut.nn, cut.count);
  r.vertical_rmse = r.up_rmse;
  r.td_rmse_ms = rms(cut.td, cut.count);
  r.horizontal_rmse_full = rms(full.ee + full.nn, full.count);
  r.vertical_rmse_full = rms(full.uu, full.count);
  r.td_rmse_ms_full = rms(full.td, full.count);
  r.epochs_used = cut.count;
  r.convergence_cut_s = convergence_cut_s;
  return r;
}

double enhancement_percent(double baseline, double candidate) {
  return (baseline - candidate) / baseline * 100.0;
}

Comparison compare(const RunReport& baseline, const RunReport& candidate) {
  Comparison c;
  c.baseline = baseline;
  c.candidate = candidate;
  c.enhancement_horizontal = enhancement_percent(baseline.horizontal_rmse, candidate.horizontal_rmse);
  c.enhancement_vertical = enhancement_percent(baseline.vertical_rmse, candidate.vertical_rmse);
  c.enhancement_td = enhancement_percent(baseline.td_rmse_ms, candidate.td_rmse_ms);
  return c;
}

const char* source_name(pipeline::OutputSource s) {
  switch (s) {
    case pipeline::OutputSource::ColdStart: return "cold_start";
    case pipeline::OutputSource::EkfOnly: return "ekf_only";
    case pipeline::OutputSource::Hybrid: return "hybrid";
    case pipeline::OutputSource::EkfFallback: return "ekf_fallback";
  }
  return "unknown";
}

namespace {

pipeline::OutputSource source_from_name(const std::string& name, int lineno) {
  if (name == "cold_start") return pipeline::OutputSource::ColdStart;
  if (name == "ekf_only") return pipeline::OutputSource::EkfOnly;
  if (name == "hybrid") return pipeline::OutputSource::Hybrid;
  if (name == "ekf_fallback") return pipeline::OutputSource::EkfFallback;
  throw ParseError("trace: unknown source '" + name + "'", lineno);
}

}  // namespace

void write_trace_csv(const std::string& path, const std::vector<pipeline::EpochOutput>& outputs,
                     const geo::EnuFrame& frame) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fputs(
      "t,source,rx,ry,rz,enu_e,enu_n,enu_u,vx,vy,vz,clock_bias,clock_drift,td,"
      "fgo_cost,fgo_iterations,td_rank_deficient,has_fix\n",
      f);
  for (const auto& o : outputs) {
    const Eigen::Vector3d enu = o.has_fix ? frame.to_enu(o.r) : Eigen::Vector3d::Zero();
    std::fprintf(f,
                 "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                 "%.17g,%.17g,%d,%d,%d\n",
                 o.t, source_name(o.source), o.r.x(), o.r.y(), o.r.z(), enu.x(), enu.y(), enu.z(),
                 o.v.x(), o.v.y(), o.v.z(), o.clock_bias, o.clock_drift, o.td, o.fgo_cost,
                 o.fgo_iterations, o.fgo_td_rank_deficient ? 1 : 0, o.has_fix ? 1 : 0);
  }
  std::fclose(f);
}

std::vector<pipeline::EpochOutput> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<pipeline::EpochOutput> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    char source[32];
    double t, rx, ry, rz, ee, en, eu, vx, vy, vz, cb, cd, td, cost;
    int iters, rank_deficient, has_fix;
    const int got = std::sscanf(
        line.c_str(),
        "%lf,%31[^,],%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d,%d,%d", &t, source,
        &rx, &ry, &rz, &ee, &en, &eu, &vx, &vy, &vz, &cb, &cd, &td, &cost, &iters,
        &rank_deficient, &has_fix);
    if (got != 18) throw ParseError("trace: expected 18 columns, got " + std::to_string(got), lineno);
    pipeline::EpochOutput o;
    o.t = t;
    o.source = source_from_name(source, lineno);
    o.r = {rx, ry, rz};
    o.v = {vx, vy, vz};
    o.clock_bias = cb;
    o.clock_drift = cd;
    o.td = td;
    o.fgo_cost = cost;
    o.fgo_iterations = iters;
    o.fgo_td_rank_deficient = rank_deficient != 0;
    o.has_fix = has_fix != 0;
    out.push_back(o);
  }
  if (out.empty()) throw ParseError("trace: no rows", lineno ? lineno : 1);
  return out;
}

void write_report_csv(const std::string& path, const std::vector<Comparison>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fputs(
      "seed,estimator,horizontal_rmse_m,vertical_rmse_m,td_rmse_ms,east_rmse_m,north_rmse_m,"
      "up_rmse_m,horizontal_rmse_full_m,vertical_rmse_full_m,td_rmse_ms_full,epochs_used,"
      "convergence_cut_s,enhancement_horizontal_pct,enhancement_vertical_pct,"
      "enhancement_td_pct,config_hash\n",
      f);
  for (const auto& c : rows) {
    const auto put = [&](const char* name, const RunReport& r, bool enh) {
      std::fprintf(f, "%llu,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,",
                   static_cast<unsigned long long>(r.seed), name, r.horizontal_rmse,
                   r.vertical_rmse, r.td_rmse_ms, r.east_rmse, r.north_rmse, r.up_rmse,
                   r.horizontal_rmse_full, r.vertical_rmse_full, r.td_rmse_ms_full, r.epochs_used,
                   r.convergence_cut_s);
      if (enh)
        std::fprintf(f, "%.17g,%.17g,%.17g,", c.enhancement_horizontal, c.enhancement_vertical,
                     c.enhancement_td);
      else
        std::fputs(",,,", f);
      std::fprintf(f, "%s\n", r.config_hash.c_str());
    };
    put("ekf", c.baseline, false);
    put("fegut", c.candidate, true);
  }
  std::fclose(f);
}

std::string format_report_table(const Comparison& c) {
  char buf[512];
  std::string s;
  s += "estimator    horizontal(m)  vertical(m)  time-offset(ms)\n";
  std::snprintf(buf, sizeof buf, "ekf          %12.4f  %11.4f  %15.4f\n", c.baseline.horizontal_rmse,
                c.baseline.vertical_rmse, c.baseline.td_rmse_ms);
  s += buf;
  std::snprintf(buf, sizeof buf, "fegut        %12.4f  %11.4f  %15.4f\n",
                c.candidate.horizontal_rmse, c.candidate.vertical_rmse, c.candidate.td_rmse_ms);
  s += buf;
  std::snprintf(buf, sizeof buf, "enhancement  %11.2f%%  %10.2f%%  %14.2f%%\n",
                c.enhancement_horizontal, c.enhancement_vertical, c.enhancement_td);
  s += buf;
  return s;
}

void write_plotdata_position(const std::string& path,
                             const std::vector<pipeline::EpochOutput>& ekf,
                             const std::vector<pipeline::EpochOutput>& fegut,
                             const traj::TruthTable& truth, const geo::EnuFrame& frame) {
  if (ekf.size() != fegut.size())
    throw std::invalid_argument("plotdata: trace lengths differ");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fputs("t,ekf_horizontal_err,ekf_vertical_err,fegut_horizontal_err,fegut_vertical_err\n", f);
  for (std::size_t i = 0; i < ekf.size(); ++i) {
    const traj::MotionSample s = truth.sample(ekf[i].t);
    const auto err = [&](const pipeline::EpochOutput& o) {
      return Eigen::Vector3d(frame.rotate_to_enu(o.r - s.r));
    };
    const Eigen::Vector3d a = ekf[i].has_fix ? err(ekf[i]) : Eigen::Vector3d::Zero();
    const Eigen::Vector3d b = fegut[i].has_fix ? err(fegut[i]) : Eigen::Vector3d::Zero();
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", ekf[i].t, std::hypot(a.x(), a.y()),
                 std::abs(a.z()), std::hypot(b.x(), b.y()), std::abs(b.z()));
  }
  std::fclose(f);
}

void write_plotdata_td(const std::string& path, const std::vector<pipeline::EpochOutput>& ekf,
                       const std::vector<pipeline::EpochOutput>& fegut, double td_true_s) {
  if (ekf.size() != fegut.size())
    throw std::invalid_argument("plotdata: trace lengths differ");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fputs("t,td_true_ms,ekf_td_ms,fegut_td_ms\n", f);
  for (std::size_t i = 0; i < ekf.size(); ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", ekf[i].t, td_true_s * 1e3, ekf[i].td * 1e3,
                 fegut[i].td * 1e3);
  std::fclose(f);
}

void write_plotdata_trajectory(const std::string& path,
                               const std::vector<pipeline::EpochOutput>& ekf,
                               const std::vector<pipeline::EpochOutput>& fegut,
                               const traj::TruthTable& truth, const geo::EnuFrame& frame) {
  if (ekf.size() != fegut.size())
    throw std::invalid_argument("plotdata: trace lengths differ");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fputs("t,truth_e,truth_n,ekf_e,ekf_n,fegut_e,fegut_n\n", f);
  for (std::size_t i = 0; i < ekf.size(); ++i) {
    const traj::MotionSample s = truth.sample(ekf[i].t);
    const Eigen::Vector3d tru = frame.to_enu(s.r);
    const Eigen::Vector3d a = ekf[i].has_fix ? frame.to_enu(ekf[i].r) : tru;
    const Eigen::Vector3d b = fegut[i].has_fix ? frame.to_enu(fegut[i].r) : tru;
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", ekf[i].t, tru.x(), tru.y(),
                 a.x(), a.y(), b.x(), b.y());
  }
  std::fclose(f);
}

}  // namespace fegut::eval
