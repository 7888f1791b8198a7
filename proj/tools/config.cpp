#include "config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

namespace rtspec {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + path + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + (path.empty() ? key : path + "." + key) + "'");
  }
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for key '" + path + (path.empty() ? "" : ".") + key + "'");
  }
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  check_keys(doc, "", {"profile", "grid", "cocycle", "rayleigh", "evolution", "wavepacket",
                       "output_dir", "seed", "workers"});

  if (doc.contains("profile")) {
    const json& p = doc.at("profile");
    check_keys(p, "profile", {"family", "params", "g"});
    read(p, "profile", "family", cfg.profile.family);
    read(p, "profile", "params", cfg.profile.params);
    read(p, "profile", "g", cfg.profile.g);
  }
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    check_keys(g, "grid", {"L", "n"});
    read(g, "grid", "L", cfg.grid.L);
    read(g, "grid", "n", cfg.grid.n);
  }
  if (doc.contains("cocycle")) {
    const json& c = doc.at("cocycle");
    check_keys(c, "cocycle", {"T", "tol", "angles", "x2_stride"});
    read(c, "cocycle", "T", cfg.cocycle.T);
    read(c, "cocycle", "tol", cfg.cocycle.tol);
    read(c, "cocycle", "angles", cfg.cocycle.angles);
    read(c, "cocycle", "x2_stride", cfg.cocycle.x2_stride);
  }
  if (doc.contains("rayleigh")) {
    const json& r = doc.at("rayleigh");
    check_keys(r, "rayleigh", {"k_list", "eps_target", "d_eps", "dump_eigenfunctions"});
    read(r, "rayleigh", "k_list", cfg.rayleigh.k_list);
    read(r, "rayleigh", "eps_target", cfg.rayleigh.eps_target);
    read(r, "rayleigh", "d_eps", cfg.rayleigh.d_eps);
    read(r, "rayleigh", "dump_eigenfunctions", cfg.rayleigh.dump_eigenfunctions);
  }
  if (doc.contains("evolution")) {
    const json& e = doc.at("evolution");
    check_keys(e, "evolution", {"k", "T", "dt", "cfl", "init", "envelope_width", "project",
                                "fit_window", "record_stride", "dump_snapshots"});
    read(e, "evolution", "k", cfg.evolution.k);
    read(e, "evolution", "T", cfg.evolution.T);
    read(e, "evolution", "dt", cfg.evolution.dt);
    read(e, "evolution", "cfl", cfg.evolution.cfl);
    read(e, "evolution", "init", cfg.evolution.init);
    read(e, "evolution", "envelope_width", cfg.evolution.envelope_width);
    read(e, "evolution", "project", cfg.evolution.project);
    read(e, "evolution", "fit_window", cfg.evolution.fit_window);
    read(e, "evolution", "record_stride", cfg.evolution.record_stride);
    read(e, "evolution", "dump_snapshots", cfg.evolution.dump_snapshots);
  }
  if (doc.contains("wavepacket")) {
    const json& w = doc.at("wavepacket");
    check_keys(w, "wavepacket", {"x20", "xi0", "delta", "T", "b0"});
    if (w.contains("x20")) {
      double x = 0.0;
      read(w, "wavepacket", "x20", x);
      cfg.wavepacket.x20 = x;
    }
    read(w, "wavepacket", "xi0", cfg.wavepacket.xi0);
    read(w, "wavepacket", "delta", cfg.wavepacket.delta);
    read(w, "wavepacket", "T", cfg.wavepacket.T);
    read(w, "wavepacket", "b0", cfg.wavepacket.b0);
    if (cfg.wavepacket.xi0.size() != 2)
      throw ConfigError("config: 'wavepacket.xi0' must have 2 components");
    if (!cfg.wavepacket.b0.empty() && cfg.wavepacket.b0.size() != 3)
      throw ConfigError("config: 'wavepacket.b0' must have 3 components");
  }
  read(doc, "", "output_dir", cfg.output_dir);
  read(doc, "", "seed", cfg.seed);
  read(doc, "", "workers", cfg.workers);

  if (cfg.grid.n < 3) throw ConfigError("config: 'grid.n' must be at least 3");
  if (cfg.grid.L <= 0) throw ConfigError("config: 'grid.L' must be positive");
  if (cfg.evolution.init != "eigenmode" && cfg.evolution.init != "random")
    throw ConfigError("config: 'evolution.init' must be 'eigenmode' or 'random'");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const RunConfig& cfg) {
  json doc;
  doc["profile"] = {{"family", cfg.profile.family}, {"params", cfg.profile.params},
                    {"g", cfg.profile.g}};
  doc["grid"] = {{"L", cfg.grid.L}, {"n", cfg.grid.n}};
  doc["cocycle"] = {{"T", cfg.cocycle.T}, {"tol", cfg.cocycle.tol},
                    {"angles", cfg.cocycle.angles}, {"x2_stride", cfg.cocycle.x2_stride}};
  doc["rayleigh"] = {{"k_list", cfg.rayleigh.k_list}, {"eps_target", cfg.rayleigh.eps_target},
                     {"d_eps", cfg.rayleigh.d_eps},
                     {"dump_eigenfunctions", cfg.rayleigh.dump_eigenfunctions}};
  doc["evolution"] = {{"k", cfg.evolution.k}, {"T", cfg.evolution.T}, {"dt", cfg.evolution.dt},
                      {"cfl", cfg.evolution.cfl}, {"init", cfg.evolution.init},
                      {"envelope_width", cfg.evolution.envelope_width},
                      {"project", cfg.evolution.project}, {"fit_window", cfg.evolution.fit_window},
                      {"record_stride", cfg.evolution.record_stride},
                      {"dump_snapshots", cfg.evolution.dump_snapshots}};
  json wp = {{"xi0", cfg.wavepacket.xi0}, {"delta", cfg.wavepacket.delta},
             {"T", cfg.wavepacket.T}};
  if (cfg.wavepacket.x20) wp["x20"] = *cfg.wavepacket.x20;
  if (!cfg.wavepacket.b0.empty()) wp["b0"] = cfg.wavepacket.b0;
  doc["wavepacket"] = wp;
  doc["output_dir"] = cfg.output_dir;
  doc["seed"] = cfg.seed;
  doc["workers"] = cfg.workers;
  return doc;
}

}  // namespace rtspec
