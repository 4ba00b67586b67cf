#include "fegut/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <thread>

#include "fegut/errors.hpp"

namespace fegut::experiment {

namespace {

traj::TrajectorySpec padded_spec(const config::ExperimentConfig& cfg) {
  traj::TrajectorySpec tspec = cfg.trajectory;
  if (tspec.pad_before_s < cfg.td_true_s) tspec.pad_before_s = cfg.td_true_s + 1.0;
  return tspec;
}

scene::Dataset synthesize_for(const config::ExperimentConfig& cfg, uint64_t seed,
                              const traj::TruthTable& truth) {
  const traj::TrajectorySpec tspec = padded_spec(cfg);
  const geo::EnuFrame frame(tspec.origin);
  const scene::Constellation constellation(cfg.constellation, tspec.origin);
  const scene::AnchorSet anchors = scene::place_anchors(
      frame, traj::trajectory_center_enu(tspec), cfg.anchor_half_spacing_m, cfg.anchor_height_m);

  scene::Dataset ds = scene::synthesize_dataset(truth, constellation, anchors, cfg.clock,
                                                cfg.noise, cfg.td_true_s, cfg.rates, seed,
                                                tspec.origin, cfg.uwb_timing);
  config::ExperimentConfig hashed = cfg;
  hashed.seed = seed;
  ds.meta.config_hash = config::config_hash(hashed);
  return ds;
}

}  // namespace

Scenario build_scenario(const config::ExperimentConfig& cfg, uint64_t seed) {
  traj::TruthTable truth = traj::build_truth_table(padded_spec(cfg));
  scene::Dataset ds = synthesize_for(cfg, seed, truth);
  return {std::move(truth), std::move(ds)};
}

std::vector<pipeline::EpochOutput> run_estimator(const config::ExperimentConfig& cfg,
                                                 const scene::Dataset& dataset,
                                                 const std::string& estimator,
                                                 const DebugSinks& debug) {
  pipeline::PipelineConfig pcfg = config::make_pipeline_config(cfg);
  pcfg.ekf_state_trace = debug.ekf_state_trace;
  pcfg.solver.debug_stream = debug.fgo_dump;
  if (estimator == "fegut") return pipeline::run_fegut(dataset.epochs, pcfg);
  if (estimator == "ekf") return pipeline::run_baseline_ekf(dataset.epochs, pcfg);
  throw ConfigError("unknown estimator '" + estimator + "' (expected 'ekf' or 'fegut')");
}

SeedResult run_seed(const config::ExperimentConfig& cfg, uint64_t seed,
                    const traj::TruthTable* truth) {
  config::ExperimentConfig seeded = cfg;
  seeded.seed = seed;

  SeedResult result;
  result.seed = seed;

  // The truth table is seed-independent; callers doing many seeds prebuild it.
  std::optional<traj::TruthTable> local;
  if (!truth) {
    local.emplace(traj::build_truth_table(padded_spec(seeded)));
    truth = &*local;
  }
  const traj::TruthTable* table = truth;
  const scene::Dataset dataset = synthesize_for(seeded, seed, *truth);

  const auto ekf_out = run_estimator(seeded, dataset, "ekf");
  const auto fegut_out = run_estimator(seeded, dataset, "fegut");

  eval::RunReport ekf_rep = eval::compute_rmse(ekf_out, *table, cfg.trajectory.origin,
                                               cfg.td_true_s, cfg.convergence_cut_s);
  eval::RunReport fegut_rep = eval::compute_rmse(fegut_out, *table, cfg.trajectory.origin,
                                                 cfg.td_true_s, cfg.convergence_cut_s);
  ekf_rep.seed = seed;
  fegut_rep.seed = seed;
  ekf_rep.config_hash = dataset.meta.config_hash;
  fegut_rep.config_hash = dataset.meta.config_hash;
  result.comparison = eval::compare(ekf_rep, fegut_rep);
  return result;
}

namespace {

Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  if (xs.empty()) return a;
  double sum = 0;
  for (double x : xs) sum += x;
  a.mean = sum / static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - a.mean) * (x - a.mean);
  a.stddev = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
  return a;
}

}  // namespace

MonteCarloSummary run_montecarlo(const config::ExperimentConfig& cfg,
                                 const std::vector<uint64_t>& seeds, int workers) {
  if (seeds.empty()) throw ConfigError("montecarlo: seed list is empty");
  if (workers <= 0)
    workers = static_cast<int>(std::min<std::size_t>(seeds.size(),
                                                     std::thread::hardware_concurrency() ?: 2));

  // The truth table only depends on the trajectory, so share one copy.
  traj::TrajectorySpec tspec = cfg.trajectory;
  if (tspec.pad_before_s < cfg.td_true_s) tspec.pad_before_s = cfg.td_true_s + 1.0;
  const traj::TruthTable truth = traj::build_truth_table(tspec);

  MonteCarloSummary summary;
  summary.per_seed.resize(seeds.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) break;
      summary.per_seed[i] = run_seed(cfg, seeds[i], &truth);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::vector<double> eh, ev, et, fh, fv, ft, gh, gv, gt;
  for (const auto& r : summary.per_seed) {
    eh.push_back(r.comparison.baseline.horizontal_rmse);
    ev.push_back(r.comparison.baseline.vertical_rmse);
    et.push_back(r.comparison.baseline.td_rmse_ms);
    fh.push_back(r.comparison.candidate.horizontal_rmse);
    fv.push_back(r.comparison.candidate.vertical_rmse);
    ft.push_back(r.comparison.candidate.td_rmse_ms);
    gh.push_back(r.comparison.enhancement_horizontal);
    gv.push_back(r.comparison.enhancement_vertical);
    gt.push_back(r.comparison.enhancement_td);
  }
  summary.ekf_horizontal = aggregate(eh);
  summary.ekf_vertical = aggregate(ev);
  summary.ekf_td_ms = aggregate(et);
  summary.fegut_horizontal = aggregate(fh);
  summary.fegut_vertical = aggregate(fv);
  summary.fegut_td_ms = aggregate(ft);
  summary.enhancement_horizontal = aggregate(gh);
  summary.enhancement_vertical = aggregate(gv);
  summary.enhancement_td = aggregate(gt);
  summary.enhancement_of_means_horizontal =
      eval::enhancement_percent(summary.ekf_horizontal.mean, summary.fegut_horizontal.mean);
  summary.enhancement_of_means_vertical =
      eval::enhancement_percent(summary.ekf_vertical.mean, summary.fegut_vertical.mean);
  summary.enhancement_of_means_td =
      eval::enhancement_percent(summary.ekf_td_ms.mean, summary.fegut_td_ms.mean);
  return summary;
}

std::string format_montecarlo_table(const MonteCarloSummary& s) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "monte carlo over %zu seeds (mean +/- std)\n",
                s.per_seed.size());
  out += buf;
  out += "estimator    horizontal(m)        vertical(m)          time-offset(ms)\n";
  std::snprintf(buf, sizeof buf, "ekf          %8.4f +/- %6.4f  %8.4f +/- %6.4f  %8.3f +/- %6.3f\n",
                s.ekf_horizontal.mean, s.ekf_horizontal.stddev, s.ekf_vertical.mean,
                s.ekf_vertical.stddev, s.ekf_td_ms.mean, s.ekf_td_ms.stddev);
  out += buf;
  std::snprintf(buf, sizeof buf, "fegut        %8.4f +/- %6.4f  %8.4f +/- %6.4f  %8.3f +/- %6.3f\n",
                s.fegut_horizontal.mean, s.fegut_horizontal.stddev, s.fegut_vertical.mean,
                s.fegut_vertical.stddev, s.fegut_td_ms.mean, s.fegut_td_ms.stddev);
  out += buf;
  std::snprintf(buf, sizeof buf, "enhancement  %7.2f%%             %7.2f%%             %7.2f%%\n",
                s.enhancement_of_means_horizontal, s.enhancement_of_means_vertical,
                s.enhancement_of_means_td);
  out += buf;
  return out;
}

void write_montecarlo_csv(const std::string& path, const MonteCarloSummary& s,
                          const std::string& hash) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fputs(
      "seed,ekf_horizontal_m,ekf_vertical_m,ekf_td_ms,fegut_horizontal_m,fegut_vertical_m,"
      "fegut_td_ms,enhancement_horizontal_pct,enhancement_vertical_pct,enhancement_td_pct,"
      "config_hash\n",
      f);
  for (const auto& r : s.per_seed) {
    const auto& c = r.comparison;
    std::fprintf(f, "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                 static_cast<unsigned long long>(r.seed), c.baseline.horizontal_rmse,
                 c.baseline.vertical_rmse, c.baseline.td_rmse_ms, c.candidate.horizontal_rmse,
                 c.candidate.vertical_rmse, c.candidate.td_rmse_ms, c.enhancement_horizontal,
                 c.enhancement_vertical, c.enhancement_td, hash.c_str());
  }
  std::fprintf(f, "mean,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
               s.ekf_horizontal.mean, s.ekf_vertical.mean, s.ekf_td_ms.mean,
               s.fegut_horizontal.mean, s.fegut_vertical.mean, s.fegut_td_ms.mean,
               s.enhancement_of_means_horizontal, s.enhancement_of_means_vertical,
               s.enhancement_of_means_td, hash.c_str());
  std::fprintf(f, "stddev,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
               s.ekf_horizontal.stddev, s.ekf_vertical.stddev, s.ekf_td_ms.stddev,
               s.fegut_horizontal.stddev, s.fegut_vertical.stddev, s.fegut_td_ms.stddev,
               s.enhancement_horizontal.stddev, s.enhancement_vertical.stddev,
               s.enhancement_td.stddev, hash.c_str());
  std::fclose(f);
}

}  // namespace fegut::experiment
