#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "rt/profiles.hpp"

namespace rt {

// Point of the reduced cotangent bundle. x1 is omitted: the symbol and the
// cocycle depend spatially on x2 only.
struct PhasePoint {
  double x2 = 0.0;
  Eigen::Vector2d xi{1.0, 0.0};
};

// Fundamental solution of the amplitude ODE, with overflow guarded by
// rescaling: the true matrix is B * exp(log_scale).
struct CocycleResult {
  Eigen::Matrix3d B = Eigen::Matrix3d::Identity();
  double log_scale = 0.0;
  PhasePoint terminal;
  long steps = 0;
  long rejected = 0;
  double est_error = 0.0;
};

// Bicharacteristic flow of the shear steady state, in closed form:
// (x2; xi1, xi2) -> (x2; xi1, xi2 - U'(x2) xi1 t).
PhasePoint flow(const PhasePoint& p, double t, const SteadyState& s);

// Matrix of the amplitude transport system acting on b = (b1, b2, r).
// 0-homogeneous in xi; throws if |xi| = 0.
Eigen::Matrix3d symbol_a0(const PhasePoint& p, const SteadyState& s);

// Solves dB/dt = a0(flow(p, t)) B, B(0) = Id, by adaptive RK5(4).
CocycleResult integrate_cocycle(const PhasePoint& p, double T, const SteadyState& s,
                                double tol = 1e-10);

// Orthonormal basis of the fiber F(xi) = { b : (b1, b2) . xi = 0 }:
// e1 = (xi2, -xi1, 0)/|xi|, e2 = (0, 0, 1).
std::pair<Eigen::Vector3d, Eigen::Vector3d> fiber_basis(const Eigen::Vector2d& xi);

// Spectral norm of the 2x2 matrix expressing b -> B b from fiber_basis(xi0)
// to fiber_basis(xi(T)). Includes the exp(log_scale) factor.
double restricted_norm(const CocycleResult& result, const Eigen::Vector2d& xi0);

// log of restricted_norm, evaluated without overflow.
double restricted_log_norm(const CocycleResult& result, const Eigen::Vector2d& xi0);

// (1/T) log ||B_T||_{F(xi0) -> F(xi(T))}.
double local_exponent(const PhasePoint& p, double T, const SteadyState& s,
                      double tol = 1e-10);

// Closed-form essential exponent mu = max{0, sup_{U'=0, rho0'>0} sqrt(g rho0'/rho0)}.
// For U == 0 the sup runs over the whole grid with golden-section refinement.
double mu_formula(const SteadyState& s, const Grid1D& grid);

// Shared scan: max over the grid (with refinement) of g max(rho0', 0)/rho0.
double hydrostatic_rate_sq_max(const SteadyState& s, const Grid1D& grid);

// Default sampling for mu_numeric: grid nodes (strided) x equispaced angles,
// always including the distinguished directions (+-1, 0).
std::vector<PhasePoint> mu_default_samples(const Grid1D& grid, int angles = 32,
                                           int x2_stride = 1);

// Max over samples of local_exponent. Samples are independent; distributed
// over `workers` threads with a deterministic max reduction.
double mu_numeric(const SteadyState& s, const std::vector<PhasePoint>& samples,
                  double T, double tol = 1e-10, int workers = 1);

// Per-sample exponents (same computation as mu_numeric, exposed for CSV sweeps).
std::vector<double> exponent_sweep(const SteadyState& s,
                                   const std::vector<PhasePoint>& samples, double T,
                                   double tol = 1e-10, int workers = 1);

struct SturmCoeff {
  double p = 0.0;       // coefficient of v'' + p(t) v = 0 along the flow
  double factor = 1.0;  // exponential change-of-variables factor, u(t) = factor * v(t)
};

// Sturm-Liouville reduction of the b2 component: p(t) = -(g rho0'/rho0) xi1^2/|xi(t)|^2
// and the closed-form exponential factor (log branch for U' xi1 != 0).
SturmCoeff sturm_coeff(const PhasePoint& p, double t, const SteadyState& s);

// Sobolev-weighted cocycle: B scaled by |xi(-T)|^m / |xi0|^m.
CocycleResult sobolev_cocycle(const PhasePoint& p, double T, double m,
                              const SteadyState& s, double tol = 1e-10);

// sup over 16 unit-circle directions of || B_T(x2, xi) - Bbar_T(x2, xi) ||, where
// Bbar is the explicit asymptotic cocycle built from the reference density rho_bar.
double asymptotic_gap(const PhasePoint& p, double T, const SteadyState& s,
                      const std::function<double(double)>& rho_bar);

// Explicit asymptotic cocycle matrix.
Eigen::Matrix3d asymptotic_cocycle(double x2, const Eigen::Vector2d& xi, double T,
                                   double g, const std::function<double(double)>& rho_bar);

}  // namespace rt
