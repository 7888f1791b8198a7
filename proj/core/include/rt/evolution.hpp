#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "rt/cocycle.hpp"
#include "rt/profiles.hpp"
#include "rt/rayleigh.hpp"

namespace rt {

// Complex grid fields of one horizontal wavenumber k of the linearized system.
struct ModeState {
  int k = 1;
  double t = 0.0;
  Eigen::VectorXcd v1, v2, r;  // size grid.n; v2 vanishes at the walls
};

// Centered first difference, second-order one-sided at the end nodes.
Eigen::VectorXcd diff_op(const Eigen::VectorXcd& f, double h);

// max over interior nodes of |i k v1 + D v2|.
double divergence_residual(const ModeState& st, const Grid1D& grid);

// Solves D(rho0^{-1} D q) - k^2 rho0^{-1} q = -2 i k U' v2 - g D(rho0^{-1} r),
// q(+-L) = 0, on the compact tridiagonal stencil.
Eigen::VectorXcd recover_pressure(const ModeState& st, const SteadyState& s,
                                  const Grid1D& grid);

// Time derivative of the state (pressure recovered internally).
ModeState rhs(const ModeState& st, const SteadyState& s, const Grid1D& grid);

// Discrete Leray-type projection: removes i k v1 + D v2 exactly (to solver
// round-off) via a Neumann elliptic solve compatible with the centered D.
ModeState project(const ModeState& st, const SteadyState& s, const Grid1D& grid);

struct GrowthReport {
  std::vector<double> times;
  std::vector<double> log_norm;      // log L2 norm of (v1, v2, r)
  std::vector<double> div_residual;  // absolute, max over interior nodes
  std::vector<double> norm_v;        // L2 norm of (v1, v2) for divergence ratios
  double rate = 0.0;
  double fit_residual = 0.0;
  double window_fraction = 0.5;
};

struct EvolveOptions {
  double dt = 0.0;                 // must satisfy dt <= cfl h / max(|U|, 1)
  double cfl = 0.5;
  bool project_each_step = true;   // OFF is a drift diagnostic, not a run mode
  double fit_window_fraction = 0.5;
  int record_stride = 1;
};

// Classical RK4 with a fixed step. Throws on NaN/overflow with the time reached.
std::pair<ModeState, GrowthReport> evolve(const ModeState& state0, double T,
                                          const SteadyState& s, const Grid1D& grid,
                                          const EvolveOptions& opt);

// Least-squares slope of log_norm over the trailing window (>= 10 samples).
double growth_rate(const std::vector<double>& times, const std::vector<double>& log_norm,
                   double window_fraction, double* fit_residual = nullptr);

// Initial states.
ModeState eigenmode_state(const EigenSolution& mode, const SteadyState& s,
                          const Grid1D& grid);
ModeState random_state(int k, const Grid1D& grid, std::uint64_t seed,
                       double envelope_width = 5.0);

struct WavepacketReport {
  double measured_amp = 0.0;   // |(v1, v2, r)| at the ray node at time T
  double predicted_amp = 0.0;  // |B_T(x20, xi0) b0|
  double ratio = 0.0;
  double mismatch = 0.0;       // |ratio - 1|
  double x2_node = 0.0;        // grid node used as the ray position
  int k = 0;
  GrowthReport growth;
};

// WKB wave-packet experiment: evolves the projected packet
// b0 h(x2) exp(i xi02 x2 / delta) at wavenumber k = xi01/delta and compares the
// measured amplitude at the ray with the cocycle prediction.
WavepacketReport wavepacket_run(const SteadyState& s, const Grid1D& grid, double x20,
                                const Eigen::Vector2d& xi0, const Eigen::Vector3d& b0,
                                double delta, double T, const EvolveOptions& opt);

}  // namespace rt
