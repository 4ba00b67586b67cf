#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fegut/errors.hpp"
#include "fegut/experiment.hpp"

namespace py = pybind11;
using namespace fegut;

namespace {

config::ExperimentConfig cfg_from_json(const std::string& text) {
  return text.empty() ? config::default_config() : config::parse_config(text);
}

py::dict report_dict(const eval::RunReport& r) {
  py::dict d;
  d["horizontal_rmse_m"] = r.horizontal_rmse;
  d["vertical_rmse_m"] = r.vertical_rmse;
  d["td_rmse_ms"] = r.td_rmse_ms;
  d["east_rmse_m"] = r.east_rmse;
  d["north_rmse_m"] = r.north_rmse;
  d["up_rmse_m"] = r.up_rmse;
  d["horizontal_rmse_full_m"] = r.horizontal_rmse_full;
  d["vertical_rmse_full_m"] = r.vertical_rmse_full;
  d["td_rmse_ms_full"] = r.td_rmse_ms_full;
  d["epochs_used"] = r.epochs_used;
  return d;
}

py::dict comparison_dict(const eval::Comparison& c) {
  py::dict d;
  d["ekf"] = report_dict(c.baseline);
  d["fegut"] = report_dict(c.candidate);
  d["enhancement_horizontal_pct"] = c.enhancement_horizontal;
  d["enhancement_vertical_pct"] = c.enhancement_vertical;
  d["enhancement_td_pct"] = c.enhancement_td;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "GNSS/UWB tightly coupled integration with online temporal calibration";

  py::register_exception<ConfigError>(m, "ConfigError");

  m.def("default_config_json", [] { return config::to_json(config::default_config()); });
  m.def("config_hash",
        [](const std::string& text) { return config::config_hash(cfg_from_json(text)); },
        py::arg("config_json"));

  m.def("geodetic_to_ecef",
        [](double lat, double lon, double h) {
          return Eigen::Vector3d(geo::geodetic_to_ecef({lat, lon, h}));
        },
        py::arg("lat_deg"), py::arg("lon_deg"), py::arg("height_m"));
  m.def("ecef_to_geodetic", [](const Eigen::Vector3d& e) {
    const geo::GeodeticCoord g = geo::ecef_to_geodetic(e);
    return py::make_tuple(g.lat_deg, g.lon_deg, g.height_m);
  });

  py::class_<geo::EnuFrame>(m, "EnuFrame")
      .def(py::init([](double lat, double lon, double h) {
             return geo::EnuFrame({lat, lon, h});
           }),
           py::arg("lat_deg"), py::arg("lon_deg"), py::arg("height_m"))
      .def("to_enu", &geo::EnuFrame::to_enu)
      .def("from_enu", &geo::EnuFrame::from_enu)
      .def_property_readonly("origin_ecef",
                             [](const geo::EnuFrame& f) { return f.origin_ecef(); });

  py::class_<traj::TruthTable>(m, "TruthTable")
      .def_property_readonly("t_begin", &traj::TruthTable::t_begin)
      .def_property_readonly("t_end", &traj::TruthTable::t_end)
      .def_property_readonly("lap_duration_s",
                             [](const traj::TruthTable& t) { return t.lap_duration_s; })
      .def("sample", [](const traj::TruthTable& t, double time) {
        const traj::MotionSample s = t.sample(time);
        return py::make_tuple(s.r, s.v, s.a);
      });

  m.def("build_truth_table",
        [](const std::string& config_json) {
          return traj::build_truth_table(cfg_from_json(config_json).trajectory);
        },
        py::arg("config_json") = std::string());

  m.def("simulate",
        [](const std::string& config_json, long seed, const std::string& out_dir) {
          config::ExperimentConfig cfg = cfg_from_json(config_json);
          if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
          const experiment::Scenario sc = experiment::build_scenario(cfg, cfg.seed);
          scene::write_dataset(out_dir + "/dataset.jsonl", sc.dataset);
          sc.truth.write_csv(out_dir + "/truth.csv");
          return sc.dataset.epochs.size();
        },
        py::arg("config_json") = std::string(), py::arg("seed") = -1, py::arg("out_dir") = ".");

  m.def("run_seed",
        [](const std::string& config_json, long seed) {
          config::ExperimentConfig cfg = cfg_from_json(config_json);
          const uint64_t s = seed >= 0 ? static_cast<uint64_t>(seed) : cfg.seed;
          return comparison_dict(experiment::run_seed(cfg, s).comparison);
        },
        py::arg("config_json") = std::string(), py::arg("seed") = -1);

  m.def("run_traces",
        [](const std::string& config_json, long seed) {
          config::ExperimentConfig cfg = cfg_from_json(config_json);
          if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
          const experiment::Scenario sc = experiment::build_scenario(cfg, cfg.seed);
          py::dict out;
          for (const std::string est : {"ekf", "fegut"}) {
            const auto outputs = experiment::run_estimator(cfg, sc.dataset, est);
            std::vector<double> t, td;
            std::vector<Eigen::Vector3d> r;
            for (const auto& o : outputs) {
              t.push_back(o.t);
              td.push_back(o.td);
              r.push_back(o.r);
            }
            py::dict trace;
            trace["t"] = t;
            trace["td"] = td;
            trace["r_ecef"] = r;
            out[est.c_str()] = trace;
          }
          return out;
        },
        py::arg("config_json") = std::string(), py::arg("seed") = -1);

  m.def("montecarlo",
        [](const std::string& config_json, const std::vector<uint64_t>& seeds) {
          config::ExperimentConfig cfg = cfg_from_json(config_json);
          const auto& use = seeds.empty() ? cfg.montecarlo_seeds : seeds;
          const auto s = experiment::run_montecarlo(cfg, use);
          py::dict d;
          d["ekf_horizontal_mean_m"] = s.ekf_horizontal.mean;
          d["ekf_vertical_mean_m"] = s.ekf_vertical.mean;
          d["ekf_td_mean_ms"] = s.ekf_td_ms.mean;
          d["fegut_horizontal_mean_m"] = s.fegut_horizontal.mean;
          d["fegut_vertical_mean_m"] = s.fegut_vertical.mean;
          d["fegut_td_mean_ms"] = s.fegut_td_ms.mean;
          d["enhancement_horizontal_pct"] = s.enhancement_of_means_horizontal;
          d["enhancement_vertical_pct"] = s.enhancement_of_means_vertical;
          d["enhancement_td_pct"] = s.enhancement_of_means_td;
          py::list per_seed;
          for (const auto& r : s.per_seed) per_seed.append(comparison_dict(r.comparison));
          d["per_seed"] = per_seed;
          return d;
        },
        py::arg("config_json") = std::string(), py::arg("seeds") = std::vector<uint64_t>{});

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
