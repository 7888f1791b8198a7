#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "rt/cocycle.hpp"
#include "rt/csv.hpp"
#include "rt/evolution.hpp"
#include "rt/parallel.hpp"
#include "rt/profiles.hpp"
#include "rt/rayleigh.hpp"

namespace rtspec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& resolved) {
  json doc;
  doc["version"] = RTSPEC_VERSION;
  doc["command"] = command;
  doc["config"] = resolved;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest.json in " + dir.string());
  out << doc.dump(2) << "\n";
}

struct RunContext {
  rt::SteadyState profile;
  rt::Grid1D grid;
  fs::path outdir;
  int workers = 1;
};

RunContext make_context(const RunConfig& cfg) {
  RunContext ctx{rt::make_profile(cfg.profile.family, cfg.profile.params, cfg.profile.g),
                 rt::Grid1D::uniform(cfg.grid.L, cfg.grid.n), fs::path(cfg.output_dir),
                 resolve_workers(cfg.workers)};
  fs::create_directories(ctx.outdir);
  return ctx;
}

int finish(const std::initializer_list<const rt::CsvWriter*>& writers, int status) {
  for (const auto* w : writers)
    if (w->nan_seen()) return std::max(status, kExitSolverFailure);
  return status;
}

int run_validate(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);
  write_manifest(ctx.outdir, "validate", config_to_json(cfg));
  const rt::ValidationReport rep = rt::validate_assumptions(ctx.profile, ctx.grid, 1e-6);
  rt::CsvWriter csv(ctx.outdir / "validation.csv",
                    {"check", "pass", "worst_x", "worst_value", "threshold"});
  for (const auto& c : rep.checks)
    csv.row({c.name, std::string(c.pass ? "true" : "false"), c.worst_x, c.worst_value,
             c.threshold});
  csv.close();
  return finish({&csv}, rep.all_pass ? kExitOk : kExitValidationFailed);
}

int run_mu(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);
  write_manifest(ctx.outdir, "mu", config_to_json(cfg));
  const auto& cc = cfg.cocycle;
  const auto samples = rt::mu_default_samples(ctx.grid, cc.angles, cc.x2_stride);

  const double mu_f = rt::mu_formula(ctx.profile, ctx.grid);
  const auto exps_half =
      rt::exponent_sweep(ctx.profile, samples, cc.T / 2, cc.tol, ctx.workers);
  const auto exps =
      rt::exponent_sweep(ctx.profile, samples, cc.T, cc.tol, ctx.workers);
  const double mu_half = *std::max_element(exps_half.begin(), exps_half.end());
  const double mu_num = *std::max_element(exps.begin(), exps.end());

  rt::CsvWriter sweep(ctx.outdir / "exponents.csv", {"x2", "xi1", "xi2", "T", "exponent"});
  for (size_t i = 0; i < samples.size(); ++i)
    sweep.row({samples[i].x2, samples[i].xi(0), samples[i].xi(1), cc.T, exps[i]});
  sweep.close();

  rt::CsvWriter mu(ctx.outdir / "mu.csv", {"method", "value"});
  mu.row({std::string("formula"), mu_f});
  mu.row({std::string("numeric_T=") + rt::format_sci(cc.T / 2), mu_half});
  mu.row({std::string("numeric_T=") + rt::format_sci(cc.T), mu_num});
  mu.close();
  return finish({&sweep, &mu}, kExitOk);
}

void eigen_row(rt::CsvWriter& csv, const rt::EigenSolution& sol) {
  csv.row({static_cast<long long>(sol.k), sol.eps, sol.c.real(), sol.c.imag(),
           sol.lambda.real(), sol.lambda.imag(), sol.residual});
}

void dump_eigenfunction(const fs::path& dir, const std::string& stem,
                        const rt::Grid1D& grid, const std::vector<std::complex<double>>& f) {
  rt::CsvWriter re(dir / (stem + "_re.csv"), {"y", "value"});
  rt::CsvWriter im(dir / (stem + "_im.csv"), {"y", "value"});
  for (int i = 0; i < grid.n; ++i) {
    re.row({grid.x[i], f[i].real()});
    im.row({grid.x[i], f[i].imag()});
  }
}

int run_eigen(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);
  write_manifest(ctx.outdir, "eigen", config_to_json(cfg));
  const auto sols =
      rt::lambda_sequence(ctx.profile, ctx.grid, cfg.rayleigh.k_list, ctx.workers);
  rt::CsvWriter csv(ctx.outdir / "eigen.csv",
                    {"k", "eps", "re_c", "im_c", "lambda_re", "lambda_im", "residual"});
  for (const auto& sol : sols) eigen_row(csv, sol);
  csv.close();
  if (cfg.rayleigh.dump_eigenfunctions) {
    for (const auto& sol : sols) {
      if (sol.stable) continue;
      dump_eigenfunction(ctx.outdir, "eigenfunction_k" + std::to_string(sol.k), ctx.grid,
                         sol.phi);
    }
  }
  return finish({&csv}, kExitOk);
}

int run_continue(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);
  write_manifest(ctx.outdir, "continue", config_to_json(cfg));
  const auto& ks = cfg.rayleigh.k_list;
  std::vector<std::vector<rt::EigenSolution>> paths(ks.size());
  // independent (k, eps_target) jobs; deterministic order of the output rows
  rt::parallel_for(static_cast<int>(ks.size()), ctx.workers, [&](int i) {
    paths[i] = rt::continue_in_eps(ctx.profile, ctx.grid, ks[i], cfg.rayleigh.eps_target,
                                   cfg.rayleigh.d_eps);
  });
  rt::CsvWriter csv(ctx.outdir / "continuation.csv",
                    {"k", "eps", "re_c", "im_c", "lambda_re", "lambda_im", "residual"});
  for (const auto& path : paths)
    for (const auto& sol : path) eigen_row(csv, sol);
  csv.close();
  if (cfg.rayleigh.dump_eigenfunctions) {
    for (const auto& path : paths) {
      if (path.empty()) continue;
      const auto& sol = path.back();
      dump_eigenfunction(ctx.outdir,
                         "eigenfunction_k" + std::to_string(sol.k) + "_eps_final", ctx.grid,
                         sol.phi);
    }
  }
  return finish({&csv}, kExitOk);
}

rt::ModeState initial_state(const RunConfig& cfg, const RunContext& ctx) {
  if (cfg.evolution.init == "eigenmode") {
    const rt::EigenSolution sol = rt::solve_hydrostatic(ctx.profile, ctx.grid, cfg.evolution.k);
    if (sol.stable)
      throw std::runtime_error("evolve: profile has no unstable hydrostatic mode at k = " +
                               std::to_string(cfg.evolution.k));
    return rt::eigenmode_state(sol, ctx.profile, ctx.grid);
  }
  return rt::random_state(cfg.evolution.k, ctx.grid, cfg.seed, cfg.evolution.envelope_width);
}

rt::EvolveOptions evolve_options(const RunConfig& cfg, const RunContext& ctx, double* dt_out) {
  rt::EvolveOptions opt;
  opt.cfl = cfg.evolution.cfl;
  double umax = 0.0;
  for (double y : ctx.grid.x) umax = std::max(umax, std::abs(ctx.profile.U(y)));
  opt.dt = cfg.evolution.dt > 0.0 ? cfg.evolution.dt
                                  : opt.cfl * ctx.grid.h / std::max(umax, 1.0);
  opt.project_each_step = cfg.evolution.project;
  opt.fit_window_fraction = cfg.evolution.fit_window;
  opt.record_stride = cfg.evolution.record_stride;
  if (dt_out) *dt_out = opt.dt;
  return opt;
}

void write_norm_history(const fs::path& dir, const rt::GrowthReport& rep) {
  rt::CsvWriter csv(dir / "norm_history.csv", {"t", "log_norm", "div_residual"});
  for (size_t i = 0; i < rep.times.size(); ++i)
    csv.row({rep.times[i], rep.log_norm[i], rep.div_residual[i]});
}

void write_snapshot(const fs::path& dir, const std::string& name, const rt::Grid1D& grid,
                    const Eigen::VectorXcd& f) {
  rt::CsvWriter csv(dir / ("snapshot_" + name + ".csv"), {"y", "re", "im"});
  for (int i = 0; i < grid.n; ++i) csv.row({grid.x[i], f(i).real(), f(i).imag()});
}

int run_evolve(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);
  double dt_resolved = 0.0;
  const rt::EvolveOptions opt = evolve_options(cfg, ctx, &dt_resolved);
  json resolved = config_to_json(cfg);
  resolved["evolution"]["dt"] = dt_resolved;
  write_manifest(ctx.outdir, "evolve", resolved);

  const rt::ModeState st0 = initial_state(cfg, ctx);
  auto [final_state, rep] = rt::evolve(st0, cfg.evolution.T, ctx.profile, ctx.grid, opt);
  write_norm_history(ctx.outdir, rep);

  rt::CsvWriter growth(ctx.outdir / "growth.csv", {"quantity", "value"});
  growth.row({std::string("rate"), rep.rate});
  growth.row({std::string("fit_residual"), rep.fit_residual});
  growth.row({std::string("window_fraction"), rep.window_fraction});
  growth.close();

  if (cfg.evolution.dump_snapshots) {
    write_snapshot(ctx.outdir, "v1", ctx.grid, final_state.v1);
    write_snapshot(ctx.outdir, "v2", ctx.grid, final_state.v2);
    write_snapshot(ctx.outdir, "r", ctx.grid, final_state.r);
  }
  return finish({&growth}, kExitOk);
}

int run_wavepacket(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);

  // resolve the ray position and amplitude
  double x20;
  if (cfg.wavepacket.x20) {
    x20 = *cfg.wavepacket.x20;
  } else {
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i < ctx.grid.n; ++i) {
      const double v = ctx.profile.g() * std::max(ctx.profile.drho0(ctx.grid.x[i]), 0.0) /
                       ctx.profile.rho0(ctx.grid.x[i]);
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    x20 = ctx.grid.x[best];
  }
  const Eigen::Vector2d xi0(cfg.wavepacket.xi0[0], cfg.wavepacket.xi0[1]);
  Eigen::Vector3d b0;
  if (!cfg.wavepacket.b0.empty()) {
    b0 = Eigen::Vector3d(cfg.wavepacket.b0[0], cfg.wavepacket.b0[1], cfg.wavepacket.b0[2]);
  } else {
    // growing fiber direction of the frozen-coefficient system at the ray
    const double rho = ctx.profile.rho0(x20);
    const double rhop = std::max(ctx.profile.drho0(x20), 0.0);
    const double n2 = xi0.squaredNorm();
    const double omega = std::sqrt(ctx.profile.g() * rhop / rho) * std::abs(xi0(0)) /
                         std::sqrt(n2);
    if (omega > 0.0) {
      b0 = Eigen::Vector3d(-xi0(1) / xi0(0), 1.0,
                           -omega * rho * n2 / (ctx.profile.g() * xi0(0) * xi0(0)));
    } else {
      b0 = Eigen::Vector3d(-xi0(1) / xi0(0), 1.0, 0.0);
    }
    b0.normalize();
  }

  rt::EvolveOptions opt;
  double umax = 0.0;
  for (double y : ctx.grid.x) umax = std::max(umax, std::abs(ctx.profile.U(y)));
  opt.dt = 0.5 * ctx.grid.h / std::max(umax, 1.0);
  opt.fit_window_fraction = 0.5;

  json resolved = config_to_json(cfg);
  resolved["wavepacket"]["x20"] = x20;
  resolved["wavepacket"]["b0"] = std::vector<double>{b0(0), b0(1), b0(2)};
  write_manifest(ctx.outdir, "wavepacket", resolved);

  const rt::WavepacketReport rep = rt::wavepacket_run(
      ctx.profile, ctx.grid, x20, xi0, b0, cfg.wavepacket.delta, cfg.wavepacket.T, opt);
  write_norm_history(ctx.outdir, rep.growth);

  rt::CsvWriter csv(ctx.outdir / "wavepacket.csv", {"quantity", "value"});
  csv.row({std::string("k"), static_cast<double>(rep.k)});
  csv.row({std::string("delta"), cfg.wavepacket.delta});
  csv.row({std::string("x2_node"), rep.x2_node});
  csv.row({std::string("T"), cfg.wavepacket.T});
  csv.row({std::string("measured_amp"), rep.measured_amp});
  csv.row({std::string("predicted_amp"), rep.predicted_amp});
  csv.row({std::string("ratio"), rep.ratio});
  csv.row({std::string("mismatch"), rep.mismatch});
  csv.close();
  return finish({&csv}, kExitOk);
}

int run_crosscheck(const RunConfig& cfg) {
  RunContext ctx = make_context(cfg);
  double dt_resolved = 0.0;
  const rt::EvolveOptions opt = evolve_options(cfg, ctx, &dt_resolved);
  json resolved = config_to_json(cfg);
  resolved["evolution"]["dt"] = dt_resolved;
  write_manifest(ctx.outdir, "crosscheck", resolved);

  // route 1: closed formula
  const double mu_f = rt::mu_formula(ctx.profile, ctx.grid);

  // route 2: variational eigenvalue at the largest requested k
  const int k_eigen = *std::max_element(cfg.rayleigh.k_list.begin(), cfg.rayleigh.k_list.end());
  const rt::EigenSolution eig = rt::solve_hydrostatic(ctx.profile, ctx.grid, k_eigen);
  const double lambda_k = eig.stable ? 0.0 : eig.lambda.real();

  // route 3: measured PDE growth rate
  const rt::ModeState st0 = initial_state(cfg, ctx);
  auto [final_state, rep] = rt::evolve(st0, cfg.evolution.T, ctx.profile, ctx.grid, opt);
  (void)final_state;
  const double pde_rate = rep.rate;

  const std::string eig_label = "eigen_k" + std::to_string(k_eigen);
  const double vals[3] = {mu_f, lambda_k, pde_rate};
  const std::string names[3] = {"formula", eig_label, "pde_rate"};

  rt::CsvWriter csv(ctx.outdir / "summary.csv",
                    {"method", "value", "gap_vs_formula", "gap_vs_" + eig_label,
                     "gap_vs_pde_rate"});
  for (int i = 0; i < 3; ++i)
    csv.row({names[i], vals[i], std::abs(vals[i] - vals[0]), std::abs(vals[i] - vals[1]),
             std::abs(vals[i] - vals[2])});
  csv.close();
  return finish({&csv}, kExitOk);
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg) {
  if (command == "validate") return run_validate(cfg);
  if (command == "mu") return run_mu(cfg);
  if (command == "eigen") return run_eigen(cfg);
  if (command == "continue") return run_continue(cfg);
  if (command == "evolve") return run_evolve(cfg);
  if (command == "wavepacket") return run_wavepacket(cfg);
  if (command == "crosscheck") return run_crosscheck(cfg);
  throw ConfigError("unknown command '" + command + "'");
}

int run_cli(const std::string& command, const std::string& config_path,
            const std::string& out_override, int workers_override,
            std::string* error_message) {
  try {
    RunConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (workers_override > 0) {
      cfg.workers = workers_override;
    } else if (cfg.workers == 0) {
      if (const char* env = std::getenv("RTSPEC_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) cfg.workers = w;
      }
    }
    return run_command(command, cfg);
  } catch (const ConfigError& e) {
    if (error_message) *error_message = e.what();
    return kExitBadConfig;
  } catch (const std::invalid_argument& e) {
    if (error_message) *error_message = e.what();
    return kExitBadConfig;
  } catch (const std::exception& e) {
    if (error_message) *error_message = e.what();
    return kExitSolverFailure;
  }
}

}  // namespace rtspec
