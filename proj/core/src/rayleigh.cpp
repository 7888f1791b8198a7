#include "rt/rayleigh.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rt/cocycle.hpp"
#include "rt/ode.hpp"
#include "rt/parallel.hpp"

namespace rt {

namespace {
using Complex = std::complex<double>;

// interior slice helpers: unknowns live on nodes 1..n-2
int interior_size(const Grid1D& g) { return g.n - 2; }
}  // namespace

OperatorPair assemble(const SteadyState& s, const Grid1D& grid, int k) {
  if (k < 1) throw std::invalid_argument("assemble: k must be >= 1");
  const int m = interior_size(grid);
  if (m < 1) throw std::invalid_argument("assemble: grid too small");
  const double h = grid.h, h2 = h * h;

  OperatorPair op;
  op.grid = grid;
  op.k = k;
  op.A.diag.resize(m);
  op.A.off.resize(m - 1);
  op.B_diag.resize(m);
  for (int i = 0; i < m; ++i) {
    const double y = grid.x[i + 1];
    const double rho_m = s.rho0(y - 0.5 * h);
    const double rho_p = s.rho0(y + 0.5 * h);
    op.A.diag[i] = (rho_m + rho_p) / h2 + k * k * s.rho0(y);
    if (i + 1 < m) op.A.off[i] = -rho_p / h2;
    op.B_diag[i] = s.g() * s.drho0(y);
  }
  // factorization doubles as the SPD check
  TridiagLDLT probe(op.A);
  (void)probe;
  return op;
}

namespace {

// Shifted power iteration for the largest sigma of B x = sigma A x. Returns
// (sigma, x, converged). The shift guarantees the dominant eigenvalue of
// A^{-1}B + shift I is shift + sigma_max even when B is indefinite.
struct PowerResult {
  double sigma = 0.0;
  std::vector<double> x;
  bool converged = false;
  double residual = 0.0;
};

PowerResult power_largest(const OperatorPair& op, const TridiagLDLT& chol,
                          const SteadyState& s, const std::vector<double>* deflate = nullptr,
                          int max_iter = 200000) {
  const int m = static_cast<int>(op.B_diag.size());
  const double h = op.grid.h;
  double babs = 0.0;
  for (double b : op.B_diag) babs = std::max(babs, std::abs(b));
  // |sigma| <= max|B| / (k^2 min rho) since (A x, x) >= k^2 min rho (x, x);
  // shifting by that bound makes shift + sigma_max the dominant eigenvalue.
  double min_rho = s.rho0(op.grid.x[1]);
  for (int i = 0; i < m; ++i) min_rho = std::min(min_rho, s.rho0(op.grid.x[i + 1]));
  const double shift = babs / std::max(1e-12, op.k * op.k * min_rho) + 1.0;

  std::vector<double> x(m), bx(m), ax(m);
  // seed concentrated where B is largest (positive part), fallback to ones
  for (int i = 0; i < m; ++i) x[i] = std::max(op.B_diag[i], 0.0) + 1e-3;
  auto normalize = [&](std::vector<double>& v) {
    const double nrm = grid_norm(std::span<const double>(v), h);
    for (double& e : v) e /= nrm;
  };
  auto a_inner = [&](const std::vector<double>& u, const std::vector<double>& v) {
    const std::vector<double> av = op.A.apply(v);
    double sdot = 0.0;
    for (int i = 0; i < m; ++i) sdot += u[i] * av[i];
    return h * sdot;
  };
  normalize(x);

  double sigma = 0.0;
  PowerResult out;
  double best_res = 1e300;
  int stall = 0;
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i < m; ++i) bx[i] = op.B_diag[i] * x[i];
    std::vector<double> y = bx;
    chol.solve_inplace(std::span<double>(y));
    for (int i = 0; i < m; ++i) y[i] += shift * x[i];
    if (deflate) {
      const double proj = a_inner(y, *deflate) / a_inner(*deflate, *deflate);
      for (int i = 0; i < m; ++i) y[i] -= proj * (*deflate)[i];
    }
    normalize(y);
    x.swap(y);

    if (it % 8 == 7 || it == max_iter - 1) {
      ax = op.A.apply(x);
      for (int i = 0; i < m; ++i) bx[i] = op.B_diag[i] * x[i];
      double num = 0.0, den = 0.0;
      for (int i = 0; i < m; ++i) {
        num += x[i] * bx[i];
        den += x[i] * ax[i];
      }
      sigma = num / den;
      // residual of the F-form: ||A x - sigma^{-1} B x|| / ||x|| ~ eigen residual
      double res = 0.0;
      for (int i = 0; i < m; ++i) {
        const double ri = bx[i] - sigma * ax[i];
        res += ri * ri;
      }
      res = std::sqrt(h * res);
      if (sigma > 0.0) res /= std::abs(sigma);  // scale of ||A x - (1/sigma) B x||
      if (res < best_res * 0.999) {
        best_res = res;
        stall = 0;
      } else if (++stall > 40) {
        break;  // residual floor reached
      }
      if (res <= 1e-11) {
        out.converged = true;
        break;
      }
    }
  }
  out.sigma = sigma;
  out.x = std::move(x);
  out.residual = best_res;
  if (!out.converged && best_res <= 1e-10) out.converged = true;
  return out;
}

}  // namespace

EigenSolution solve_hydrostatic(const SteadyState& s, const Grid1D& grid, int k) {
  const OperatorPair op = assemble(s, grid, k);
  const int m = static_cast<int>(op.B_diag.size());

  EigenSolution sol;
  sol.k = k;
  sol.eps = 0.0;

  double bmax = 0.0;
  for (double b : op.B_diag) bmax = std::max(bmax, b);
  if (bmax <= 0.0) {
    sol.stable = true;  // B negative semi-definite: no unstable mode
    return sol;
  }

  const TridiagLDLT chol(op.A);
  PowerResult top = power_largest(op, chol, s);
  if (!top.converged)
    throw std::runtime_error("solve_hydrostatic: power iteration did not converge");
  if (top.sigma <= 0.0) {
    sol.stable = true;
    return sol;
  }

  // second eigenvalue estimate by deflated iteration, for multiplicity warning
  PowerResult second = power_largest(op, chol, s, &top.x, 4000);
  sol.sigma_gap = top.sigma - second.sigma;
  sol.near_multiple = std::abs(sol.sigma_gap) <= 1e-8;

  const double lambda = k * std::sqrt(top.sigma);
  sol.lambda = Complex(lambda, 0.0);
  sol.c = Complex(0.0, lambda / k);

  // normalize ||phi|| = 1, max element positive
  const double h = grid.h;
  double nrm = grid_norm(std::span<const double>(top.x), h);
  int imax = 0;
  for (int i = 0; i < m; ++i)
    if (std::abs(top.x[i]) > std::abs(top.x[imax])) imax = i;
  const double sign = top.x[imax] >= 0.0 ? 1.0 : -1.0;

  sol.phi.assign(grid.n, Complex(0.0, 0.0));
  for (int i = 0; i < m; ++i) sol.phi[i + 1] = Complex(sign * top.x[i] / nrm, 0.0);
  sol.r = recover_r(s, grid, sol.phi, sol.c, 0.0);

  const auto res = residual_F(s, grid, k, 0.0, sol.c, sol.phi);
  sol.residual = grid_norm(std::span<const Complex>(res), h) /
                 grid_norm(std::span<const Complex>(sol.phi), h);
  return sol;
}

std::vector<EigenSolution> lambda_sequence(const SteadyState& s, const Grid1D& grid,
                                           int k_max, int workers) {
  std::vector<int> ks(k_max);
  for (int k = 1; k <= k_max; ++k) ks[k - 1] = k;
  return lambda_sequence(s, grid, ks, workers);
}

std::vector<EigenSolution> lambda_sequence(const SteadyState& s, const Grid1D& grid,
                                           const std::vector<int>& ks, int workers) {
  std::vector<EigenSolution> out(ks.size());
  parallel_for(static_cast<int>(ks.size()), workers,
               [&](int i) { out[i] = solve_hydrostatic(s, grid, ks[i]); });
  return out;
}

RelabelResult relabel_check(const SteadyState& s, const Grid1D& grid) {
  const SteadyState hydro = s.hydrostatic_copy();
  RelabelResult r;
  r.Lambda_sq = hydrostatic_rate_sq_max(hydro, grid);
  const double mu = mu_formula(hydro, grid);
  r.mu_sq = mu * mu;
  r.gap = std::abs(r.Lambda_sq - r.mu_sq);
  return r;
}

std::vector<Complex> recover_r(const SteadyState& s, const Grid1D& grid,
                               const std::vector<Complex>& phi, Complex c, double eps) {
  if (c.imag() <= 0.0) throw std::invalid_argument("recover_r: Im c must be positive");
  if (static_cast<int>(phi.size()) != grid.n)
    throw std::invalid_argument("recover_r: phi size mismatch");
  std::vector<Complex> r(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double y = grid.x[i];
    r[i] = -s.drho0(y) * phi[i] / (eps * s.U(y) - c);
  }
  return r;
}

namespace {
// diagonal (non-differential) part of F: eps (rho0 U')'/(eps U - c) + g rho0'/(eps U - c)^2
Complex potential_term(const SteadyState& s, double y, double eps, Complex c) {
  const Complex den = eps * s.U(y) - c;
  const double drhoU = s.drho0(y) * s.dU(y) + s.rho0(y) * s.d2U(y);  // (rho0 U')'
  return eps * drhoU / den + s.g() * s.drho0(y) / (den * den);
}
}  // namespace

std::vector<Complex> residual_F(const SteadyState& s, const Grid1D& grid, int k,
                                double eps, Complex c, const std::vector<Complex>& phi) {
  if (c.imag() <= 0.0) throw std::invalid_argument("residual_F: Im c must be positive");
  if (static_cast<int>(phi.size()) != grid.n)
    throw std::invalid_argument("residual_F: phi size mismatch");
  const int m = interior_size(grid);
  const double h = grid.h, h2 = h * h;
  std::vector<Complex> out(m);
  for (int i = 0; i < m; ++i) {
    const double y = grid.x[i + 1];
    const double rho_m = s.rho0(y - 0.5 * h);
    const double rho_p = s.rho0(y + 0.5 * h);
    const Complex lap = (rho_p * (phi[i + 2] - phi[i + 1]) - rho_m * (phi[i + 1] - phi[i])) / h2;
    out[i] = -lap + (k * k * s.rho0(y) + potential_term(s, y, eps, c)) * phi[i + 1];
  }
  return out;
}

std::vector<Complex> residual_F_dc(const SteadyState& s, const Grid1D& grid, int k,
                                   double eps, Complex c, const std::vector<Complex>& phi) {
  (void)k;
  if (c.imag() <= 0.0) throw std::invalid_argument("residual_F_dc: Im c must be positive");
  const int m = interior_size(grid);
  std::vector<Complex> out(m);
  for (int i = 0; i < m; ++i) {
    const double y = grid.x[i + 1];
    const Complex den = eps * s.U(y) - c;
    const double drhoU = s.drho0(y) * s.dU(y) + s.rho0(y) * s.d2U(y);
    // d/dc of eps (rho0 U')'/den = eps (rho0 U')'/den^2
    // d/dc of g rho0'/den^2      = 2 g rho0'/den^3
    out[i] = (eps * drhoU / (den * den) + 2.0 * s.g() * s.drho0(y) / (den * den * den)) *
             phi[i + 1];
  }
  return out;
}

double wronskian_drift(const SteadyState& s, const Grid1D& grid, int k, Complex c,
                       double eps, double ode_tol) {
  if (c.imag() == 0.0) {
    // critical layer on the real line if eps U - c vanishes anywhere
    for (double y : grid.x)
      if (std::abs(eps * s.U(y) - c) < 1e-12)
        throw std::invalid_argument("wronskian_drift: critical layer (c real, eps U = c)");
  }

  // phi'' = -(rho0'/rho0) phi' + [k^2 + potential/rho0] phi, two solutions jointly
  using State = Eigen::Matrix<Complex, 4, 1>;
  auto rhs = [&](double y, const State& v, State& dv) {
    const double rho = s.rho0(y);
    const double drho = s.drho0(y);
    const Complex q = static_cast<double>(k * k) + potential_term(s, y, eps, c) / rho;
    dv(0) = v(1);
    dv(1) = -(drho / rho) * v(1) + q * v(0);
    dv(2) = v(3);
    dv(3) = -(drho / rho) * v(3) + q * v(2);
  };

  State v;
  v << Complex(1.0), Complex(k), Complex(1.0), Complex(-k);  // growing-in / decaying-in seeds

  auto wr = [&](const State& st, double y) {
    return (st(1) * st(2) - st(3) * st(0)) * s.rho0(y);
  };

  std::vector<std::pair<double, Complex>> samples;
  samples.reserve(4096);
  samples.emplace_back(-grid.L, wr(v, -grid.L));

  OdeOptions opt;
  opt.rtol = ode_tol;
  opt.atol = ode_tol * 1e-2;
  const auto record = std::function<double(double, State&)>([&](double y, State& st) -> double {
    samples.emplace_back(y, wr(st, y));
    return 0.0;
  });
  // integrate -L -> 0 -> L so that a sample lands exactly at y = 0
  integrate_dopri5(rhs, -grid.L, 0.0, v, opt, record);
  const Complex ref = wr(v, 0.0);
  integrate_dopri5(rhs, 0.0, grid.L, v, opt, record);

  if (std::abs(ref) == 0.0) throw std::runtime_error("wronskian_drift: degenerate reference");
  double drift = 0.0;
  for (const auto& [y, w] : samples) drift = std::max(drift, std::abs(w - ref) / std::abs(ref));
  return drift;
}

namespace {

struct NewtonOutcome {
  bool converged = false;
  Complex c;
  std::vector<Complex> w;
  double residual = 0.0;
};

// Newton on (c, w) for F(eps, c, phi_k + w) = 0 with the bordered constraint
// <w, phi_k> = 0. The Jacobian solve uses block elimination on the complex
// tridiagonal D_wF plus one iterative-refinement pass.
NewtonOutcome newton_solve(const SteadyState& s, const Grid1D& grid, int k, double eps,
                           Complex c0, const std::vector<Complex>& w0,
                           const std::vector<Complex>& phi_k, double tol) {
  const int m = interior_size(grid);
  const double h = grid.h, h2 = h * h;

  NewtonOutcome out;
  out.c = c0;
  out.w = w0;

  auto phi_full = [&](const std::vector<Complex>& w) {
    std::vector<Complex> phi = phi_k;
    for (int i = 0; i < m; ++i) phi[i + 1] += w[i];
    return phi;
  };
  auto inner_phik = [&](const std::vector<Complex>& v_int) {
    // <v, phi_k> over interior nodes (phi_k is real here but keep it general)
    Complex acc = 0.0;
    for (int i = 0; i < m; ++i) acc += v_int[i] * std::conj(phi_k[i + 1]);
    return h * acc;
  };

  for (int it = 0; it < 50; ++it) {
    if (out.c.imag() <= 0.0) return out;  // left the upper half-plane
    const std::vector<Complex> phi = phi_full(out.w);
    const std::vector<Complex> F = residual_F(s, grid, k, eps, out.c, phi);
    const double fn = grid_norm(std::span<const Complex>(F), h);
    out.residual = fn / grid_norm(std::span<const Complex>(phi), h);
    Complex wc = 0.0;
    {
      std::vector<Complex> w_int(out.w.begin(), out.w.end());
      wc = inner_phik(w_int);
    }
    if (out.residual <= tol && std::abs(wc) <= tol) {
      out.converged = true;
      return out;
    }

    // D_w F: tridiagonal complex operator with the assemble stencil
    BandedMatrix<Complex> J(m, 1, 1);
    for (int i = 0; i < m; ++i) {
      const double y = grid.x[i + 1];
      const double rho_m = s.rho0(y - 0.5 * h);
      const double rho_p = s.rho0(y + 0.5 * h);
      J.at(i, i) = (rho_m + rho_p) / h2 + k * k * s.rho0(y) +
                   potential_term(s, y, eps, out.c);
      if (i > 0) J.at(i, i - 1) = -rho_m / h2;
      if (i + 1 < m) J.at(i, i + 1) = -rho_p / h2;
    }
    J.factor();
    const std::vector<Complex> d = residual_F_dc(s, grid, k, eps, out.c, phi);

    auto bordered_solve = [&](const std::vector<Complex>& rhs_top, Complex rhs_bot,
                              std::vector<Complex>& dw, Complex& dc) {
      std::vector<Complex> z1 = rhs_top;
      J.solve_inplace(std::span<Complex>(z1));
      std::vector<Complex> z2 = d;
      J.solve_inplace(std::span<Complex>(z2));
      const Complex denom = inner_phik(z2);
      if (std::abs(denom) == 0.0) throw std::runtime_error("continue_in_eps: singular bordered system");
      dc = (inner_phik(z1) - rhs_bot) / denom;
      dw.resize(m);
      for (int i = 0; i < m; ++i) dw[i] = z1[i] - dc * z2[i];
    };

    std::vector<Complex> rhs_top(m);
    for (int i = 0; i < m; ++i) rhs_top[i] = -F[i];
    std::vector<Complex> dw;
    Complex dc;
    bordered_solve(rhs_top, -wc, dw, dc);

    // one iterative-refinement pass on the bordered system (J is factored in
    // place, so re-apply the stencil directly)
    {
      std::vector<Complex> resid(m);
      for (int i = 0; i < m; ++i) {
        const double y = grid.x[i + 1];
        const double rho_m = s.rho0(y - 0.5 * h);
        const double rho_p = s.rho0(y + 0.5 * h);
        Complex acc = ((rho_m + rho_p) / h2 + k * k * s.rho0(y) +
                       potential_term(s, y, eps, out.c)) * dw[i];
        if (i > 0) acc += -rho_m / h2 * dw[i - 1];
        if (i + 1 < m) acc += -rho_p / h2 * dw[i + 1];
        resid[i] = rhs_top[i] - acc - d[i] * dc;
      }
      const Complex resid_bot = (-wc) - inner_phik(dw);
      std::vector<Complex> dw2;
      Complex dc2;
      bordered_solve(resid, resid_bot, dw2, dc2);
      for (int i = 0; i < m; ++i) dw[i] += dw2[i];
      dc += dc2;
    }

    for (int i = 0; i < m; ++i) out.w[i] += dw[i];
    out.c += dc;
  }
  return out;
}

}  // namespace

std::vector<EigenSolution> continue_in_eps(const SteadyState& s, const Grid1D& grid,
                                           int k, double eps_target, double d_eps) {
  if (d_eps <= 0.0) throw std::invalid_argument("continue_in_eps: d_eps must be positive");
  const EigenSolution hydro = solve_hydrostatic(s, grid, k);
  if (hydro.stable)
    throw std::runtime_error("continue_in_eps: no unstable hydrostatic mode to continue");

  std::vector<EigenSolution> path;
  path.push_back(hydro);
  if (eps_target == 0.0) return path;

  const double dir = eps_target > 0.0 ? 1.0 : -1.0;
  const double target = std::abs(eps_target);
  const int m = interior_size(grid);

  double eps_abs = 0.0;
  double step = std::min(d_eps, target);
  Complex c = hydro.c;
  std::vector<Complex> w(m, Complex(0.0, 0.0));

  while (eps_abs < target - 1e-15) {
    step = std::min(step, target - eps_abs);
    int halvings = 0;
    for (;;) {
      const double eps_try = dir * (eps_abs + step);
      NewtonOutcome res = newton_solve(s, grid, k, eps_try, c, w, hydro.phi, 1e-11);
      if (res.converged) {
        eps_abs += step;
        c = res.c;
        w = res.w;

        EigenSolution sol;
        sol.k = k;
        sol.eps = eps_try;
        sol.c = c;
        sol.lambda = Complex(0.0, -static_cast<double>(k)) * c;  // lambda = -i k c
        sol.phi = hydro.phi;
        for (int i = 0; i < m; ++i) sol.phi[i + 1] += w[i];
        sol.r = recover_r(s, grid, sol.phi, c, eps_try);
        sol.residual = res.residual;
        if (c.imag() < 1e-8) {
          sol.stable = true;  // stability-threshold marker
          path.push_back(sol);
          return path;
        }
        path.push_back(sol);
        break;
      }
      if (++halvings > 6)
        throw std::runtime_error("continue_in_eps: Newton stagnation at eps = " +
                                 std::to_string(dir * (eps_abs + step)));
      step *= 0.5;
    }
  }
  return path;
}

}  // namespace rt
