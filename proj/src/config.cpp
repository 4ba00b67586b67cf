#include "fegut/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fegut/errors.hpp"

namespace fegut::config {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

double get_num(const json& j, const std::string& where, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

}  // namespace

ExperimentConfig default_config() { return {}; }

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  check_keys(j, "config", {"scenario", "estimator", "eval", "montecarlo"});

  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    check_keys(s, "scenario",
               {"trajectory", "anchors", "constellation", "clock", "noise", "estimator_noise",
                "td_true_s", "uwb_staleness", "rates", "seed"});
    if (s.contains("trajectory")) {
      const auto& t = s.at("trajectory");
      check_keys(t, "scenario.trajectory",
                 {"shape", "origin", "horizontal_extent_m", "circle_radius_m",
                  "average_speed_mps", "duration_s", "table_rate_hz"});
      if (t.contains("shape")) {
        const std::string shape = t.at("shape").get<std::string>();
        if (shape == "lemniscate")
          cfg.trajectory.shape = traj::Shape::Lemniscate;
        else if (shape == "circle")
          cfg.trajectory.shape = traj::Shape::Circle;
        else
          throw ConfigError("scenario.trajectory.shape: expected 'lemniscate' or 'circle'");
      }
      if (t.contains("origin")) {
        const auto& o = t.at("origin");
        check_keys(o, "scenario.trajectory.origin", {"lat_deg", "lon_deg", "height_m"});
        cfg.trajectory.origin.lat_deg = get_num(o, "origin", "lat_deg", cfg.trajectory.origin.lat_deg);
        cfg.trajectory.origin.lon_deg = get_num(o, "origin", "lon_deg", cfg.trajectory.origin.lon_deg);
        cfg.trajectory.origin.height_m = get_num(o, "origin", "height_m", cfg.trajectory.origin.height_m);
      }
      cfg.trajectory.horizontal_extent_m =
          get_num(t, "trajectory", "horizontal_extent_m", cfg.trajectory.horizontal_extent_m);
      cfg.trajectory.circle_radius_m =
          get_num(t, "trajectory", "circle_radius_m", cfg.trajectory.circle_radius_m);
      cfg.trajectory.average_speed_mps =
          get_num(t, "trajectory", "average_speed_mps", cfg.trajectory.average_speed_mps);
      cfg.trajectory.duration_s = get_num(t, "trajectory", "duration_s", cfg.trajectory.duration_s);
      cfg.trajectory.table_rate_hz =
          get_num(t, "trajectory", "table_rate_hz", cfg.trajectory.table_rate_hz);
    }
    if (s.contains("anchors")) {
      const auto& a = s.at("anchors");
      check_keys(a, "scenario.anchors", {"half_spacing_m", "height_m"});
      cfg.anchor_half_spacing_m = get_num(a, "anchors", "half_spacing_m", cfg.anchor_half_spacing_m);
      cfg.anchor_height_m = get_num(a, "anchors", "height_m", cfg.anchor_height_m);
    }
    if (s.contains("constellation")) {
      const auto& c = s.at("constellation");
      check_keys(c, "scenario.constellation",
                 {"count", "altitude_m", "elevation_mask_deg", "max_pdop"});
      cfg.constellation.count =
          static_cast<int>(get_num(c, "constellation", "count", cfg.constellation.count));
      cfg.constellation.altitude_m =
          get_num(c, "constellation", "altitude_m", cfg.constellation.altitude_m);
      cfg.constellation.elevation_mask_deg =
          get_num(c, "constellation", "elevation_mask_deg", cfg.constellation.elevation_mask_deg);
      cfg.constellation.max_pdop = get_num(c, "constellation", "max_pdop", cfg.constellation.max_pdop);
    }
    if (s.contains("clock")) {
      const auto& c = s.at("clock");
      check_keys(c, "scenario.clock",
                 {"initial_bias_m", "initial_drift_mps", "bias_psd", "drift_psd"});
      cfg.clock.initial_bias_m = get_num(c, "clock", "initial_bias_m", cfg.clock.initial_bias_m);
      cfg.clock.initial_drift_mps =
          get_num(c, "clock", "initial_drift_mps", cfg.clock.initial_drift_mps);
      cfg.clock.bias_psd = get_num(c, "clock", "bias_psd", cfg.clock.bias_psd);
      cfg.clock.drift_psd = get_num(c, "clock", "drift_psd", cfg.clock.drift_psd);
    }
    const auto parse_noise = [&](const json& n, const std::string& where, scene::NoiseSpec base) {
      check_keys(n, where, {"sigma_pseudorange_m", "sigma_doppler_mps", "sigma_uwb_m"});
      base.sigma_pseudorange_m = get_num(n, where, "sigma_pseudorange_m", base.sigma_pseudorange_m);
      base.sigma_doppler_mps = get_num(n, where, "sigma_doppler_mps", base.sigma_doppler_mps);
      base.sigma_uwb_m = get_num(n, where, "sigma_uwb_m", base.sigma_uwb_m);
      return base;
    };
    if (s.contains("noise")) cfg.noise = parse_noise(s.at("noise"), "scenario.noise", cfg.noise);
    // Estimator-side R defaults to the synthesis noise when that is usable.
    cfg.estimator_noise = cfg.noise;
    if (cfg.estimator_noise.sigma_pseudorange_m <= 0 || cfg.estimator_noise.sigma_doppler_mps <= 0 ||
        cfg.estimator_noise.sigma_uwb_m <= 0)
      cfg.estimator_noise = scene::NoiseSpec{};
    if (s.contains("estimator_noise"))
      cfg.estimator_noise =
          parse_noise(s.at("estimator_noise"), "scenario.estimator_noise", cfg.estimator_noise);
    cfg.td_true_s = get_num(s, "scenario", "td_true_s", cfg.td_true_s);
    if (s.contains("uwb_staleness")) {
      const std::string mode = s.at("uwb_staleness").get<std::string>();
      if (mode == "stale_truth")
        cfg.uwb_timing = scene::UwbTimingModel::StaleTruth;
      else if (mode == "extrapolated")
        cfg.uwb_timing = scene::UwbTimingModel::Extrapolated;
      else
        throw ConfigError("scenario.uwb_staleness: expected 'stale_truth' or 'extrapolated'");
    }
    if (s.contains("rates")) {
      const auto& r = s.at("rates");
      check_keys(r, "scenario.rates", {"gnss_hz", "uwb_hz"});
      cfg.rates.gnss_hz = get_num(r, "rates", "gnss_hz", cfg.rates.gnss_hz);
      cfg.rates.uwb_hz = get_num(r, "rates", "uwb_hz", cfg.rates.uwb_hz);
    }
    if (s.contains("seed")) cfg.seed = s.at("seed").get<uint64_t>();
  }

  if (j.contains("estimator")) {
    const auto& e = j.at("estimator");
    check_keys(e, "estimator",
               {"window_size", "feedback", "feedback_alpha", "initial_td_s", "jerk_psd",
                "clock_bias_psd", "clock_drift_psd", "ekf_td_psd", "prior_cov_diag", "solver",
                "innovation_gate"});
    cfg.window_size = static_cast<int>(get_num(e, "estimator", "window_size", cfg.window_size));
    if (e.contains("feedback")) {
      const std::string fb = e.at("feedback").get<std::string>();
      if (fb == "every_solve")
        cfg.feedback = pipeline::FeedbackMode::EverySolve;
      else if (fb == "damped")
        cfg.feedback = pipeline::FeedbackMode::Damped;
      else
        throw ConfigError("estimator.feedback: expected 'every_solve' or 'damped'");
    }
    cfg.feedback_alpha = get_num(e, "estimator", "feedback_alpha", cfg.feedback_alpha);
    cfg.initial_td_s = get_num(e, "estimator", "initial_td_s", cfg.initial_td_s);
    cfg.jerk_psd = get_num(e, "estimator", "jerk_psd", cfg.jerk_psd);
    cfg.clock_bias_psd = get_num(e, "estimator", "clock_bias_psd", cfg.clock_bias_psd);
    cfg.clock_drift_psd = get_num(e, "estimator", "clock_drift_psd", cfg.clock_drift_psd);
    cfg.ekf_td_psd = get_num(e, "estimator", "ekf_td_psd", cfg.ekf_td_psd);
    if (e.contains("prior_cov_diag")) {
      const auto& p = e.at("prior_cov_diag");
      if (!p.is_array() || p.size() != 12)
        throw ConfigError("estimator.prior_cov_diag: expected 12 numbers");
      for (int i = 0; i < 12; ++i) cfg.prior_cov_diag(i) = p[static_cast<std::size_t>(i)].get<double>();
    }
    if (e.contains("solver")) {
      const auto& v = e.at("solver");
      check_keys(v, "estimator.solver",
                 {"max_iterations", "lambda_init", "lambda_up", "lambda_down", "cost_tol_rel",
                  "step_tol"});
      cfg.solver.max_iterations =
          static_cast<int>(get_num(v, "solver", "max_iterations", cfg.solver.max_iterations));
      cfg.solver.lambda_init = get_num(v, "solver", "lambda_init", cfg.solver.lambda_init);
      cfg.solver.lambda_up = get_num(v, "solver", "lambda_up", cfg.solver.lambda_up);
      cfg.solver.lambda_down = get_num(v, "solver", "lambda_down", cfg.solver.lambda_down);
      cfg.solver.cost_tol_rel = get_num(v, "solver", "cost_tol_rel", cfg.solver.cost_tol_rel);
      cfg.solver.step_tol = get_num(v, "solver", "step_tol", cfg.solver.step_tol);
    }
    if (e.contains("innovation_gate")) cfg.innovation_gate = e.at("innovation_gate").get<bool>();
  }

  if (j.contains("eval")) {
    const auto& v = j.at("eval");
    check_keys(v, "eval", {"convergence_cut_s"});
    cfg.convergence_cut_s = get_num(v, "eval", "convergence_cut_s", cfg.convergence_cut_s);
  }

  if (j.contains("montecarlo")) {
    const auto& m = j.at("montecarlo");
    check_keys(m, "montecarlo", {"seeds"});
    if (m.contains("seeds")) {
      if (!m.at("seeds").is_array() || m.at("seeds").empty())
        throw ConfigError("montecarlo.seeds: expected a nonempty array");
      cfg.montecarlo_seeds.clear();
      for (const auto& v : m.at("seeds")) cfg.montecarlo_seeds.push_back(v.get<uint64_t>());
    }
  }

  // Invariants.
  if (cfg.window_size < 2) throw ConfigError("estimator.window_size must be >= 2");
  if (cfg.td_true_s < 0) throw ConfigError("scenario.td_true_s must be nonnegative");
  if (cfg.convergence_cut_s < 0) throw ConfigError("eval.convergence_cut_s must be nonnegative");
  if (cfg.feedback_alpha <= 0 || cfg.feedback_alpha > 1)
    throw ConfigError("estimator.feedback_alpha must be in (0, 1]");
  if (cfg.estimator_noise.sigma_pseudorange_m <= 0 || cfg.estimator_noise.sigma_doppler_mps <= 0 ||
      cfg.estimator_noise.sigma_uwb_m <= 0)
    throw ConfigError("estimator noise sigmas must be positive");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  json j;
  j["scenario"]["trajectory"]["shape"] =
      cfg.trajectory.shape == traj::Shape::Lemniscate ? "lemniscate" : "circle";
  j["scenario"]["trajectory"]["origin"] = {{"lat_deg", cfg.trajectory.origin.lat_deg},
                                           {"lon_deg", cfg.trajectory.origin.lon_deg},
                                           {"height_m", cfg.trajectory.origin.height_m}};
  j["scenario"]["trajectory"]["horizontal_extent_m"] = cfg.trajectory.horizontal_extent_m;
  j["scenario"]["trajectory"]["circle_radius_m"] = cfg.trajectory.circle_radius_m;
  j["scenario"]["trajectory"]["average_speed_mps"] = cfg.trajectory.average_speed_mps;
  j["scenario"]["trajectory"]["duration_s"] = cfg.trajectory.duration_s;
  j["scenario"]["trajectory"]["table_rate_hz"] = cfg.trajectory.table_rate_hz;
  j["scenario"]["anchors"] = {{"half_spacing_m", cfg.anchor_half_spacing_m},
                              {"height_m", cfg.anchor_height_m}};
  j["scenario"]["constellation"] = {{"count", cfg.constellation.count},
                                    {"altitude_m", cfg.constellation.altitude_m},
                                    {"elevation_mask_deg", cfg.constellation.elevation_mask_deg},
                                    {"max_pdop", cfg.constellation.max_pdop}};
  j["scenario"]["clock"] = {{"initial_bias_m", cfg.clock.initial_bias_m},
                            {"initial_drift_mps", cfg.clock.initial_drift_mps},
                            {"bias_psd", cfg.clock.bias_psd},
                            {"drift_psd", cfg.clock.drift_psd}};
  j["scenario"]["noise"] = {{"sigma_pseudorange_m", cfg.noise.sigma_pseudorange_m},
                            {"sigma_doppler_mps", cfg.noise.sigma_doppler_mps},
                            {"sigma_uwb_m", cfg.noise.sigma_uwb_m}};
  j["scenario"]["estimator_noise"] = {
      {"sigma_pseudorange_m", cfg.estimator_noise.sigma_pseudorange_m},
      {"sigma_doppler_mps", cfg.estimator_noise.sigma_doppler_mps},
      {"sigma_uwb_m", cfg.estimator_noise.sigma_uwb_m}};
  j["scenario"]["td_true_s"] = cfg.td_true_s;
  j["scenario"]["uwb_staleness"] =
      cfg.uwb_timing == scene::UwbTimingModel::StaleTruth ? "stale_truth" : "extrapolated";
  j["scenario"]["rates"] = {{"gnss_hz", cfg.rates.gnss_hz}, {"uwb_hz", cfg.rates.uwb_hz}};
  j["scenario"]["seed"] = cfg.seed;

  j["estimator"]["window_size"] = cfg.window_size;
  j["estimator"]["feedback"] =
      cfg.feedback == pipeline::FeedbackMode::EverySolve ? "every_solve" : "damped";
  j["estimator"]["feedback_alpha"] = cfg.feedback_alpha;
  j["estimator"]["initial_td_s"] = cfg.initial_td_s;
  j["estimator"]["jerk_psd"] = cfg.jerk_psd;
  j["estimator"]["clock_bias_psd"] = cfg.clock_bias_psd;
  j["estimator"]["clock_drift_psd"] = cfg.clock_drift_psd;
  j["estimator"]["ekf_td_psd"] = cfg.ekf_td_psd;
  j["estimator"]["prior_cov_diag"] = std::vector<double>(cfg.prior_cov_diag.data(),
                                                         cfg.prior_cov_diag.data() + 12);
  j["estimator"]["solver"] = {{"max_iterations", cfg.solver.max_iterations},
                              {"lambda_init", cfg.solver.lambda_init},
                              {"lambda_up", cfg.solver.lambda_up},
                              {"lambda_down", cfg.solver.lambda_down},
                              {"cost_tol_rel", cfg.solver.cost_tol_rel},
                              {"step_tol", cfg.solver.step_tol}};
  j["estimator"]["innovation_gate"] = cfg.innovation_gate;

  j["eval"]["convergence_cut_s"] = cfg.convergence_cut_s;
  j["montecarlo"]["seeds"] = cfg.montecarlo_seeds;
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = to_json(cfg);
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

pipeline::PipelineConfig make_pipeline_config(const ExperimentConfig& cfg) {
  pipeline::PipelineConfig p;
  p.ekf.transition.jerk_psd = cfg.jerk_psd;
  p.ekf.transition.clock_bias_psd = cfg.clock_bias_psd;
  p.ekf.transition.clock_drift_psd = cfg.clock_drift_psd;
  p.ekf.transition.td_psd = cfg.ekf_td_psd;
  p.ekf.measurement_noise = cfg.estimator_noise;
  p.ekf.initial_cov_diag = cfg.prior_cov_diag;
  p.ekf.innovation_gate = cfg.innovation_gate;
  p.solver = cfg.solver;
  p.solver.window_size = cfg.window_size;
  p.solver.td_prior_var_ref = cfg.prior_cov_diag(models::kTimeOffset);
  p.feedback = cfg.feedback;
  p.feedback_alpha = cfg.feedback_alpha;
  p.initial_td = cfg.initial_td_s;
  return p;
}

}  // namespace fegut::config
