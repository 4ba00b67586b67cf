// fegut: GNSS/UWB tight-integration simulator and estimator bench.
//
// Subcommands:
//   simulate    write dataset.jsonl + truth.csv for one seed
//   run         run an estimator over a dataset, write trace_<name>.csv
//   evaluate    compare traces against truth, write report.csv + plot data
//   montecarlo  loop the configured seeds in memory and aggregate

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fegut/errors.hpp"
#include "fegut/experiment.hpp"

namespace fs = std::filesystem;
using namespace fegut;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOpts {
  std::string config_path;
  std::string out_dir{"."};
  int64_t seed{-1};  // <0: use the config's seed
  bool verbose{false};
};

config::ExperimentConfig load(const CommonOpts& opts) {
  config::ExperimentConfig cfg = opts.config_path.empty() ? config::default_config()
                                                          : config::load_config(opts.config_path);
  if (opts.seed >= 0) cfg.seed = static_cast<uint64_t>(opts.seed);
  return cfg;
}

int cmd_simulate(const CommonOpts& opts) {
  const config::ExperimentConfig cfg = load(opts);
  fs::create_directories(opts.out_dir);
  const experiment::Scenario sc = experiment::build_scenario(cfg, cfg.seed);
  scene::write_dataset((fs::path(opts.out_dir) / "dataset.jsonl").string(), sc.dataset);
  sc.truth.write_csv((fs::path(opts.out_dir) / "truth.csv").string());
  {
    std::ofstream cfg_out(fs::path(opts.out_dir) / "config.json");
    cfg_out << config::to_json(cfg) << "\n";
  }
  if (opts.verbose)
    std::cout << "dataset: " << sc.dataset.epochs.size() << " epochs, config hash "
              << sc.dataset.meta.config_hash << "\n";
  return kExitOk;
}

int cmd_run(const CommonOpts& opts, const std::string& estimator) {
  const config::ExperimentConfig cfg = load(opts);
  const fs::path dir(opts.out_dir);
  const scene::Dataset dataset = scene::read_dataset((dir / "dataset.jsonl").string());

  experiment::DebugSinks debug;
  std::string state_trace;
  std::ofstream fgo_dump;
  if (opts.verbose) {
    debug.ekf_state_trace = &state_trace;
    fgo_dump.open(dir / ("fgo_debug_" + estimator + ".jsonl"));
    debug.fgo_dump = &fgo_dump;
  }

  auto outputs = experiment::run_estimator(cfg, dataset, estimator, debug);
  const geo::EnuFrame frame(dataset.meta.origin);
  eval::write_trace_csv((dir / ("trace_" + estimator + ".csv")).string(), outputs, frame);

  if (opts.verbose) {
    std::ofstream(dir / ("ekf_state_trace_" + estimator + ".csv")) << state_trace;
    int fallbacks = 0, rank_warnings = 0;
    for (const auto& o : outputs) {
      fallbacks += o.source == pipeline::OutputSource::EkfFallback;
      rank_warnings += o.fgo_td_rank_deficient;
    }
    std::cout << estimator << ": " << outputs.size() << " epochs, " << fallbacks
              << " fallbacks, " << rank_warnings << " low-observability solves\n";
  }
  return kExitOk;
}

int cmd_evaluate(const CommonOpts& opts) {
  const config::ExperimentConfig cfg = load(opts);
  const fs::path dir(opts.out_dir);
  const scene::Dataset dataset = scene::read_dataset((dir / "dataset.jsonl").string());
  const traj::TruthTable truth = traj::TruthTable::read_csv((dir / "truth.csv").string());

  const auto ekf_out = eval::read_trace_csv((dir / "trace_ekf.csv").string());
  const auto fegut_out = eval::read_trace_csv((dir / "trace_fegut.csv").string());

  eval::RunReport ekf_rep = eval::compute_rmse(ekf_out, truth, dataset.meta.origin,
                                               dataset.meta.td_true_s, cfg.convergence_cut_s);
  eval::RunReport fegut_rep = eval::compute_rmse(fegut_out, truth, dataset.meta.origin,
                                                 dataset.meta.td_true_s, cfg.convergence_cut_s);
  ekf_rep.seed = fegut_rep.seed = dataset.meta.seed;
  ekf_rep.config_hash = fegut_rep.config_hash = dataset.meta.config_hash;

  const eval::Comparison cmp = eval::compare(ekf_rep, fegut_rep);
  eval::write_report_csv((dir / "report.csv").string(), {cmp});

  const geo::EnuFrame frame(dataset.meta.origin);
  eval::write_plotdata_position((dir / "plotdata_pos.csv").string(), ekf_out, fegut_out, truth,
                                frame);
  eval::write_plotdata_td((dir / "plotdata_td.csv").string(), ekf_out, fegut_out,
                          dataset.meta.td_true_s);
  eval::write_plotdata_trajectory((dir / "plotdata_traj.csv").string(), ekf_out, fegut_out, truth,
                                  frame);

  std::cout << eval::format_report_table(cmp);
  return kExitOk;
}

int cmd_montecarlo(const CommonOpts& opts) {
  const config::ExperimentConfig cfg = load(opts);
  fs::create_directories(opts.out_dir);
  const auto summary = experiment::run_montecarlo(cfg, cfg.montecarlo_seeds);
  experiment::write_montecarlo_csv((fs::path(opts.out_dir) / "report.csv").string(), summary,
                                   config::config_hash(cfg));
  std::cout << experiment::format_montecarlo_table(summary);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNSS/UWB tightly coupled integration with online temporal calibration"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string estimator{"fegut"};

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "experiment config JSON (defaults built in)");
    cmd->add_option("--out", opts.out_dir, "output/working directory");
    cmd->add_option("--seed", opts.seed, "override the config seed");
    cmd->add_flag("--verbose", opts.verbose, "chatty diagnostics");
  };

  auto* sim = app.add_subcommand("simulate", "synthesize dataset + truth table");
  add_common(sim);
  auto* run = app.add_subcommand("run", "run an estimator over a dataset");
  add_common(run);
  run->add_option("--estimator", estimator, "ekf | fegut")->check(CLI::IsMember({"ekf", "fegut"}));
  auto* ev = app.add_subcommand("evaluate", "RMSE report + plot data from traces");
  add_common(ev);
  auto* mc = app.add_subcommand("montecarlo", "aggregate RMSE over the configured seeds");
  add_common(mc);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(opts);
    if (run->parsed()) return cmd_run(opts, estimator);
    if (ev->parsed()) return cmd_evaluate(opts);
    if (mc->parsed()) return cmd_montecarlo(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
