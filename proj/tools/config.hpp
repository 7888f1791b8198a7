#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rtspec {

// Malformed configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProfileSpec {
  std::string family = "P1";
  std::vector<double> params;
  double g = 1.0;
};

struct GridSpec {
  double L = 20.0;
  int n = 801;
};

struct CocycleSpec {
  double T = 100.0;
  double tol = 1e-10;
  int angles = 32;
  int x2_stride = 1;
};

struct RayleighSpec {
  std::vector<int> k_list{1, 2, 4, 8, 16, 32};
  double eps_target = 0.05;
  double d_eps = 0.01;
  bool dump_eigenfunctions = false;
};

struct EvolutionSpec {
  int k = 2;
  double T = 20.0;
  double dt = 0.0;  // 0 -> CFL default
  double cfl = 0.5;
  std::string init = "eigenmode";  // eigenmode | random
  double envelope_width = 5.0;
  bool project = true;
  double fit_window = 0.5;
  int record_stride = 1;
  bool dump_snapshots = false;
};

struct WavepacketSpec {
  std::optional<double> x20;       // absent -> argmax of g rho0'/rho0
  std::vector<double> xi0{1.0, 0.0};
  double delta = 1.0 / 16.0;
  double T = 5.0;
  std::vector<double> b0;          // empty -> growing fiber direction at the ray
};

struct RunConfig {
  ProfileSpec profile;
  GridSpec grid;
  CocycleSpec cocycle;
  RayleighSpec rayleigh;
  EvolutionSpec evolution;
  WavepacketSpec wavepacket;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int workers = 0;  // 0 -> hardware concurrency
};

// Parses and validates a config document; unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// Fully-resolved echo for the run manifest.
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace rtspec
