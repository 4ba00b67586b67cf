#include "fegut/dataset_io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "fegut/errors.hpp"

namespace fegut::scene {
namespace {

using nlohmann::json;

void fput_vec3(std::FILE* f, const Eigen::Vector3d& v) {
  std::fprintf(f, "[%.17g,%.17g,%.17g]", v.x(), v.y(), v.z());
}

Eigen::Vector3d get_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& ds) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);

  const auto& m = ds.meta;
  std::fprintf(f,
               "{\"type\":\"fegut-dataset\",\"version\":1,\"config_hash\":\"%s\","
               "\"seed\":%llu,\"td_true_s\":%.17g,",
               m.config_hash.c_str(), static_cast<unsigned long long>(m.seed), m.td_true_s);
  std::fprintf(f, "\"origin\":{\"lat_deg\":%.17g,\"lon_deg\":%.17g,\"height_m\":%.17g},",
               m.origin.lat_deg, m.origin.lon_deg, m.origin.height_m);
  std::fputs("\"anchors\":[", f);
  for (std::size_t j = 0; j < m.anchors.anchors.size(); ++j) {
    const auto& a = m.anchors.anchors[j];
    std::fprintf(f, "%s{\"id\":%d,\"pos\":", j ? "," : "", a.id);
    fput_vec3(f, a.pos);
    std::fputs("}", f);
  }
  std::fprintf(f,
               "],\"noise\":{\"sigma_pseudorange_m\":%.17g,\"sigma_doppler_mps\":%.17g,"
               "\"sigma_uwb_m\":%.17g},\"rates\":{\"gnss_hz\":%.17g,\"uwb_hz\":%.17g}}\n",
               m.noise.sigma_pseudorange_m, m.noise.sigma_doppler_mps, m.noise.sigma_uwb_m,
               m.rates.gnss_hz, m.rates.uwb_hz);

  for (const auto& e : ds.epochs) {
    std::fprintf(f, "{\"t\":%.17g,\"kind\":\"%s\",\"sats\":[", e.t,
                 e.kind == EpochKind::GnssAndUwb ? "gnss_uwb" : "uwb_only");
    for (std::size_t i = 0; i < e.sats.size(); ++i) {
      const auto& s = e.sats[i];
      std::fprintf(f, "%s{\"id\":%d,\"pos\":", i ? "," : "", s.id);
      fput_vec3(f, s.sat_pos);
      std::fputs(",\"vel\":", f);
      fput_vec3(f, s.sat_vel);
      std::fprintf(f, ",\"pseudorange\":%.17g,\"doppler\":%.17g}", s.pseudorange, s.doppler);
    }
    std::fputs("],\"uwb\":[", f);
    for (std::size_t i = 0; i < e.uwb.size(); ++i) {
      const auto& u = e.uwb[i];
      std::fprintf(f, "%s{\"id\":%d,\"anchor_pos\":", i ? "," : "", u.id);
      fput_vec3(f, u.anchor_pos);
      std::fprintf(f, ",\"range\":%.17g}", u.range);
    }
    std::fputs("]}\n", f);
  }
  std::fclose(f);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);

  Dataset ds;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError(std::string("dataset: invalid JSON: ") + e.what(), lineno);
    }
    try {
      if (lineno == 1) {
        if (j.value("type", "") != "fegut-dataset")
          throw std::runtime_error("missing dataset header");
        auto& m = ds.meta;
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<uint64_t>();
        m.td_true_s = j.at("td_true_s").get<double>();
        const auto& o = j.at("origin");
        m.origin = {o.at("lat_deg").get<double>(), o.at("lon_deg").get<double>(),
                    o.at("height_m").get<double>()};
        for (const auto& ja : j.at("anchors")) {
          m.anchors.anchors.push_back({ja.at("id").get<int>(), get_vec3(ja.at("pos"))});
        }
        const auto& n = j.at("noise");
        m.noise = {n.at("sigma_pseudorange_m").get<double>(),
                   n.at("sigma_doppler_mps").get<double>(), n.at("sigma_uwb_m").get<double>()};
        const auto& r = j.at("rates");
        m.rates = {r.at("gnss_hz").get<double>(), r.at("uwb_hz").get<double>()};
        continue;
      }
      EpochMeasurements e;
      e.t = j.at("t").get<double>();
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "gnss_uwb")
        e.kind = EpochKind::GnssAndUwb;
      else if (kind == "uwb_only")
        e.kind = EpochKind::UwbOnly;
      else
        throw std::runtime_error("unknown epoch kind '" + kind + "'");
      for (const auto& js : j.at("sats")) {
        SatObs s;
        s.id = js.at("id").get<int>();
        s.sat_pos = get_vec3(js.at("pos"));
        s.sat_vel = get_vec3(js.at("vel"));
        s.pseudorange = js.at("pseudorange").get<double>();
        s.doppler = js.at("doppler").get<double>();
        e.sats.push_back(s);
      }
      for (const auto& ju : j.at("uwb")) {
        UwbObs u;
        u.id = ju.at("id").get<int>();
        u.anchor_pos = get_vec3(ju.at("anchor_pos"));
        u.range = ju.at("range").get<double>();
        e.uwb.push_back(u);
      }
      if (e.kind == EpochKind::UwbOnly && !e.sats.empty())
        throw std::runtime_error("uwb_only epoch carries satellite data");
      ds.epochs.push_back(std::move(e));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(std::string("dataset: ") + e.what(), lineno);
    }
  }
  if (lineno == 0) throw ParseError("dataset: empty file", 1);
  return ds;
}

}  // namespace fegut::scene
