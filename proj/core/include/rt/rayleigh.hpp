#pragma once

#include <complex>
#include <vector>

#include "rt/linalg.hpp"
#include "rt/profiles.hpp"

namespace rt {

// Symmetric discretization of the variational pencil on the interior nodes
// (Dirichlet phi(+-L) = 0): A from the form int rho0 (phi' psi' + k^2 phi psi),
// B from int g rho0' phi psi. A is SPD tridiagonal, B diagonal.
struct OperatorPair {
  TridiagSym A;
  std::vector<double> B_diag;
  Grid1D grid;
  int k = 1;
};

OperatorPair assemble(const SteadyState& s, const Grid1D& grid, int k);

struct EigenSolution {
  int k = 1;
  double eps = 0.0;
  std::complex<double> c{0.0, 0.0};       // phase speed, Im c > 0 when unstable
  std::complex<double> lambda{0.0, 0.0};  // growth rate, lambda = -i k c
  std::vector<std::complex<double>> phi;  // size n, boundary zeros included
  std::vector<std::complex<double>> r;
  double residual = 0.0;   // discrete ||F(eps, c, phi - phi_k)|| / ||phi||
  bool stable = false;     // no unstable mode (an answer, not an error)
  bool near_multiple = false;
  double sigma_gap = 0.0;  // sigma_1 - sigma_2 estimate from deflated iteration
};

// Largest sigma of B phi = sigma A phi by shifted power iteration on Cholesky
// solves; lambda_k = k sqrt(sigma), c = i lambda_k / k. Returns a stable
// marker when no positive sigma exists.
EigenSolution solve_hydrostatic(const SteadyState& s, const Grid1D& grid, int k);

// Repeated solve_hydrostatic over k = 1..k_max (or an explicit list). Jobs are
// independent and run on `workers` threads.
std::vector<EigenSolution> lambda_sequence(const SteadyState& s, const Grid1D& grid,
                                           int k_max, int workers = 1);
std::vector<EigenSolution> lambda_sequence(const SteadyState& s, const Grid1D& grid,
                                           const std::vector<int>& ks, int workers = 1);

struct RelabelResult {
  double Lambda_sq = 0.0;  // k -> infinity variational limit, max g rho0'/rho0
  double mu_sq = 0.0;      // square of mu_formula on the U-zeroed profile
  double gap = 0.0;
};

RelabelResult relabel_check(const SteadyState& s, const Grid1D& grid);

// Integrates two independent solutions of the eps-Rayleigh ODE from y = -L and
// returns the max relative drift of W(y) rho0(y) from its value at y = 0.
double wronskian_drift(const SteadyState& s, const Grid1D& grid, int k,
                       std::complex<double> c, double eps, double ode_tol = 1e-12);

// Pointwise discrete residual of the full functional
// F = -(rho0 phi')' + k^2 rho0 phi + eps (rho0 U')'/(eps U - c) phi
//     + g rho0'/(eps U - c)^2 phi
// on interior nodes, with the same stencil as assemble. Requires Im c > 0.
std::vector<std::complex<double>> residual_F(const SteadyState& s, const Grid1D& grid,
                                             int k, double eps, std::complex<double> c,
                                             const std::vector<std::complex<double>>& phi);

// D_c of the non-differential part of F, applied to phi.
std::vector<std::complex<double>> residual_F_dc(const SteadyState& s, const Grid1D& grid,
                                                int k, double eps, std::complex<double> c,
                                                const std::vector<std::complex<double>>& phi);

// r = -rho0' phi / (eps U - c) pointwise. Requires Im c > 0.
std::vector<std::complex<double>> recover_r(const SteadyState& s, const Grid1D& grid,
                                            const std::vector<std::complex<double>>& phi,
                                            std::complex<double> c, double eps);

// Predictor-corrector continuation of the unstable eigensolution in the shear
// strength, from eps = 0 to eps_target in steps of d_eps. Newton acts on
// (c, w) with the bordered constraint <w, phi_k> = 0; the step is halved on
// Newton failure (up to 6 times). Stops early with a stable marker when
// Im c < 1e-8.
std::vector<EigenSolution> continue_in_eps(const SteadyState& s, const Grid1D& grid,
                                           int k, double eps_target, double d_eps);

}  // namespace rt
