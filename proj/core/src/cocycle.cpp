#include "rt/cocycle.hpp"

#include <cmath>
#include <stdexcept>

#include "rt/linalg.hpp"
#include "rt/ode.hpp"
#include "rt/parallel.hpp"

namespace rt {

namespace {
constexpr double kRescaleThreshold = 1e100;

void check_xi(const Eigen::Vector2d& xi) {
  if (xi.squaredNorm() == 0.0) throw std::invalid_argument("cocycle: |xi| must be positive");
}
}  // namespace

PhasePoint flow(const PhasePoint& p, double t, const SteadyState& s) {
  check_xi(p.xi);
  PhasePoint q = p;
  q.xi(1) = p.xi(1) - s.dU(p.x2) * p.xi(0) * t;
  return q;
}

Eigen::Matrix3d symbol_a0(const PhasePoint& p, const SteadyState& s) {
  check_xi(p.xi);
  const double xi1 = p.xi(0), xi2 = p.xi(1);
  const double n2 = xi1 * xi1 + xi2 * xi2;
  const double up = s.dU(p.x2);
  const double rho = s.rho0(p.x2);
  const double rhop = s.drho0(p.x2);
  const double g = s.g();

  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  a(0, 1) = -up + 2.0 * up * xi1 * xi1 / n2;
  a(0, 2) = g * xi1 * xi2 / (rho * n2);
  a(1, 1) = 2.0 * up * xi1 * xi2 / n2;
  a(1, 2) = -g * xi1 * xi1 / (rho * n2);
  a(2, 1) = -rhop;
  return a;
}

CocycleResult integrate_cocycle(const PhasePoint& p, double T, const SteadyState& s,
                                double tol) {
  check_xi(p.xi);
  if (T < 0.0) throw std::invalid_argument("integrate_cocycle: T must be nonnegative");
  if (tol <= 0.0) throw std::invalid_argument("integrate_cocycle: tol must be positive");

  CocycleResult res;
  res.terminal = flow(p, T, s);
  if (T == 0.0) return res;

  using State = Eigen::Matrix<double, 9, 1>;
  State y;
  Eigen::Map<Eigen::Matrix3d>(y.data()) = Eigen::Matrix3d::Identity();

  // The symbol along the flow: x2 is constant, only xi2 moves.
  const double up = s.dU(p.x2);
  auto rhs = [&](double t, const State& b, State& dbdt) {
    PhasePoint q = p;
    q.xi(1) = p.xi(1) - up * p.xi(0) * t;
    const Eigen::Matrix3d a = symbol_a0(q, s);
    Eigen::Map<Eigen::Matrix3d>(dbdt.data()) =
        a * Eigen::Map<const Eigen::Matrix3d>(b.data());
  };

  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  double log_scale = 0.0;
  const auto post = std::function<double(double, State&)>([&](double, State& y_) -> double {
    const double nrm = y_.norm();
    if (nrm > kRescaleThreshold) {
      y_ /= nrm;
      log_scale += std::log(nrm);
      return std::log(nrm);
    }
    return 0.0;
  });

  const OdeStats stats = integrate_dopri5(rhs, 0.0, T, y, opt, post);
  res.B = Eigen::Map<Eigen::Matrix3d>(y.data());
  res.log_scale = log_scale;
  res.steps = stats.accepted;
  res.rejected = stats.rejected;
  res.est_error = stats.err_max;
  return res;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> fiber_basis(const Eigen::Vector2d& xi) {
  check_xi(xi);
  const double nrm = xi.norm();
  Eigen::Vector3d e1(xi(1) / nrm, -xi(0) / nrm, 0.0);
  Eigen::Vector3d e2(0.0, 0.0, 1.0);
  return {e1, e2};
}

namespace {
Eigen::Matrix2d fiber_matrix(const CocycleResult& result, const Eigen::Vector2d& xi0) {
  const auto [f1, f2] = fiber_basis(xi0);
  const auto [g1, g2] = fiber_basis(result.terminal.xi);
  Eigen::Matrix2d m;
  m(0, 0) = g1.dot(result.B * f1);
  m(0, 1) = g1.dot(result.B * f2);
  m(1, 0) = g2.dot(result.B * f1);
  m(1, 1) = g2.dot(result.B * f2);
  return m;
}
}  // namespace

double restricted_norm(const CocycleResult& result, const Eigen::Vector2d& xi0) {
  const Eigen::Matrix2d m = fiber_matrix(result, xi0);
  const double nrm = m.jacobiSvd().singularValues()(0);
  return nrm * std::exp(result.log_scale);
}

double restricted_log_norm(const CocycleResult& result, const Eigen::Vector2d& xi0) {
  const Eigen::Matrix2d m = fiber_matrix(result, xi0);
  const double nrm = m.jacobiSvd().singularValues()(0);
  return std::log(nrm) + result.log_scale;
}

double local_exponent(const PhasePoint& p, double T, const SteadyState& s, double tol) {
  if (T <= 0.0) throw std::invalid_argument("local_exponent: T must be positive");
  const CocycleResult res = integrate_cocycle(p, T, s, tol);
  return restricted_log_norm(res, p.xi) / T;
}

double hydrostatic_rate_sq_max(const SteadyState& s, const Grid1D& grid) {
  const auto rate_sq = [&](double y) {
    return s.g() * std::max(s.drho0(y), 0.0) / s.rho0(y);
  };
  int best = 0;
  double best_val = rate_sq(grid.x[0]);
  for (int i = 1; i < grid.n; ++i) {
    const double v = rate_sq(grid.x[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = grid.x[std::max(0, best - 1)];
  const double b = grid.x[std::min(grid.n - 1, best + 1)];
  const double y_ref = golden_max(rate_sq, a, b, 1e-13);
  return std::max(best_val, rate_sq(y_ref));
}

double mu_formula(const SteadyState& s, const Grid1D& grid) {
  const CriticalPoints cps = critical_points(s, grid);
  if (cps.all_critical) return std::sqrt(hydrostatic_rate_sq_max(s, grid));
  double best_sq = 0.0;
  for (const auto& [y, rhop] : cps.points) {
    if (rhop > 0.0) best_sq = std::max(best_sq, s.g() * rhop / s.rho0(y));
  }
  return std::sqrt(best_sq);
}

std::vector<PhasePoint> mu_default_samples(const Grid1D& grid, int angles, int x2_stride) {
  if (angles < 16) throw std::invalid_argument("mu_default_samples: need at least 16 angles");
  if (x2_stride < 1) throw std::invalid_argument("mu_default_samples: stride must be >= 1");
  std::vector<Eigen::Vector2d> dirs;
  dirs.reserve(angles + 2);
  const double two_pi = 2.0 * M_PI;
  for (int j = 0; j < angles; ++j) {
    const double th = two_pi * j / angles;
    dirs.emplace_back(std::cos(th), std::sin(th));
  }
  // distinguished directions, exactly
  dirs.emplace_back(1.0, 0.0);
  dirs.emplace_back(-1.0, 0.0);

  std::vector<PhasePoint> samples;
  samples.reserve((grid.n / x2_stride + 1) * dirs.size());
  for (int i = 0; i < grid.n; i += x2_stride) {
    for (const auto& d : dirs) samples.push_back({grid.x[i], d});
  }
  return samples;
}

std::vector<double> exponent_sweep(const SteadyState& s,
                                   const std::vector<PhasePoint>& samples, double T,
                                   double tol, int workers) {
  std::vector<double> out(samples.size());
  parallel_for(static_cast<int>(samples.size()), workers,
               [&](int i) { out[i] = local_exponent(samples[i], T, s, tol); });
  return out;
}

double mu_numeric(const SteadyState& s, const std::vector<PhasePoint>& samples, double T,
                  double tol, int workers) {
  if (T <= 0.0) throw std::invalid_argument("mu_numeric: T must be positive");
  if (samples.empty()) throw std::invalid_argument("mu_numeric: no samples");
  const std::vector<double> exps = exponent_sweep(s, samples, T, tol, workers);
  double mu = exps[0];
  for (double e : exps) mu = std::max(mu, e);
  return mu;
}

SturmCoeff sturm_coeff(const PhasePoint& p, double t, const SteadyState& s) {
  check_xi(p.xi);
  const double xi1 = p.xi(0);
  const double up = s.dU(p.x2);
  const double n0 = p.xi.squaredNorm();
  const double xi2_t = p.xi(1) - up * xi1 * t;
  const double nt = xi1 * xi1 + xi2_t * xi2_t;
  if (nt == 0.0) throw std::runtime_error("sturm_coeff: |xi(t)| vanished");

  SturmCoeff out;
  out.p = -s.g() * s.drho0(p.x2) / s.rho0(p.x2) * xi1 * xi1 / nt;
  if (std::abs(up * xi1) < 1e-14) {
    // antiderivative of xi2/|xi|^2 is xi2 t/|xi|^2 for a stationary xi
    out.factor = std::exp(2.0 * xi1 * up * p.xi(1) * t / n0);
  } else {
    // antiderivative -log|xi(t)|^2 / (2 U' xi1); factor = |xi(0)|^2/|xi(t)|^2
    out.factor = n0 / nt;
  }
  return out;
}

CocycleResult sobolev_cocycle(const PhasePoint& p, double T, double m,
                              const SteadyState& s, double tol) {
  CocycleResult res = integrate_cocycle(p, T, s, tol);
  // weight |d phi_t^{-T} xi|^m = |xi(-T)|^m, normalized to 1 at T = 0
  const PhasePoint back = flow(p, -T, s);
  res.log_scale += m * (std::log(back.xi.norm()) - std::log(p.xi.norm()));
  return res;
}

Eigen::Matrix3d asymptotic_cocycle(double x2, const Eigen::Vector2d& xi, double T,
                                   double g, const std::function<double(double)>& rho_bar) {
  check_xi(xi);
  const double n2 = xi.squaredNorm();
  const double c = g / rho_bar(x2) * xi(0) / n2 * T;
  Eigen::Matrix3d b = Eigen::Matrix3d::Identity();
  b(0, 2) = c * xi(1);
  b(1, 2) = -c * xi(0);
  return b;
}

double asymptotic_gap(const PhasePoint& p, double T, const SteadyState& s,
                      const std::function<double(double)>& rho_bar) {
  double gap = 0.0;
  for (int j = 0; j < 16; ++j) {
    const double th = 2.0 * M_PI * j / 16;
    PhasePoint q = p;
    q.xi = Eigen::Vector2d(std::cos(th), std::sin(th));
    const CocycleResult res = integrate_cocycle(q, T, s);
    const Eigen::Matrix3d b = res.B * std::exp(res.log_scale);
    const Eigen::Matrix3d bbar = asymptotic_cocycle(q.x2, q.xi, T, s.g(), rho_bar);
    const double d = (b - bbar).jacobiSvd().singularValues()(0);
    gap = std::max(gap, d);
  }
  return gap;
}

}  // namespace rt
