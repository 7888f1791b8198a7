#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rtspec: spectral growth rates, unstable eigenvalues and linearized "
               "evolution of stratified shear flow under gravity"};
  app.set_version_flag("--version", std::string(RTSPEC_VERSION));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int workers = 0;

  const char* names[] = {"validate", "mu", "eigen", "continue", "evolve", "wavepacket",
                         "crosscheck"};
  const char* descs[] = {
      "check the standing assumptions on the configured profile",
      "essential growth rate: closed formula vs Lyapunov exponent sweep",
      "hydrostatic eigenvalues lambda_k over the configured k list",
      "Newton continuation of the unstable mode in shear strength",
      "time-integrate the linearized system at one wavenumber",
      "WKB wave-packet experiment against the cocycle prediction",
      "three-route comparison: formula, eigenvalue, measured PDE rate"};
  for (int i = 0; i < 7; ++i) {
    auto* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--workers", workers, "worker threads (default: RTSPEC_WORKERS or all cores)");
  }

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  std::string error;
  const int status = rtspec::run_cli(command, config_path, out_dir, workers, &error);
  if (!error.empty()) std::cerr << "rtspec " << command << ": " << error << "\n";
  return status;
}
