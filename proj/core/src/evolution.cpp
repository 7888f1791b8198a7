#include "rt/evolution.hpp"

#include <cmath>
#include <stdexcept>

#include "rt/linalg.hpp"

namespace rt {

namespace {
using Complex = std::complex<double>;
constexpr Complex kI{0.0, 1.0};
}  // namespace

Eigen::VectorXcd diff_op(const Eigen::VectorXcd& f, double h) {
  const int n = static_cast<int>(f.size());
  Eigen::VectorXcd d(n);
  d(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
  for (int i = 1; i + 1 < n; ++i) d(i) = (f(i + 1) - f(i - 1)) / (2.0 * h);
  d(n - 1) = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
  return d;
}

double divergence_residual(const ModeState& st, const Grid1D& grid) {
  const Eigen::VectorXcd dv2 = diff_op(st.v2, grid.h);
  double worst = 0.0;
  for (int i = 1; i + 1 < grid.n; ++i)
    worst = std::max(worst, std::abs(kI * static_cast<double>(st.k) * st.v1(i) + dv2(i)));
  return worst;
}

Eigen::VectorXcd recover_pressure(const ModeState& st, const SteadyState& s,
                                  const Grid1D& grid) {
  const int n = grid.n, m = n - 2;
  const double h = grid.h, h2 = h * h;
  const double k = st.k;

  Eigen::VectorXcd rho_inv_r(n);
  for (int i = 0; i < n; ++i) rho_inv_r(i) = st.r(i) / s.rho0(grid.x[i]);
  const Eigen::VectorXcd d_rho_inv_r = diff_op(rho_inv_r, h);

  std::vector<Complex> rhs_v(m);
  for (int i = 0; i < m; ++i) {
    const double y = grid.x[i + 1];
    rhs_v[i] = -2.0 * kI * k * s.dU(y) * st.v2(i + 1) - s.g() * d_rho_inv_r(i + 1);
  }

  BandedMatrix<Complex> mtx(m, 1, 1);
  for (int i = 0; i < m; ++i) {
    const double y = grid.x[i + 1];
    const double am = 1.0 / s.rho0(y - 0.5 * h);
    const double ap = 1.0 / s.rho0(y + 0.5 * h);
    mtx.at(i, i) = Complex(-(am + ap) / h2 - k * k / s.rho0(y));
    if (i > 0) mtx.at(i, i - 1) = Complex(am / h2);
    if (i + 1 < m) mtx.at(i, i + 1) = Complex(ap / h2);
  }
  mtx.factor();
  mtx.solve_inplace(std::span<Complex>(rhs_v));

  Eigen::VectorXcd q = Eigen::VectorXcd::Zero(n);
  for (int i = 0; i < m; ++i) q(i + 1) = rhs_v[i];
  return q;
}

ModeState rhs(const ModeState& st, const SteadyState& s, const Grid1D& grid) {
  const int n = grid.n;
  const double k = st.k;
  const Eigen::VectorXcd q = recover_pressure(st, s, grid);
  const Eigen::VectorXcd dq = diff_op(q, grid.h);

  ModeState out;
  out.k = st.k;
  out.t = 1.0;  // d/dt of time itself, used by the RK4 combination
  out.v1.resize(n);
  out.v2.resize(n);
  out.r.resize(n);
  for (int i = 0; i < n; ++i) {
    const double y = grid.x[i];
    const double u = s.U(y), up = s.dU(y), rho = s.rho0(y), rhop = s.drho0(y);
    const Complex adv = -kI * k * u;
    out.v1(i) = adv * st.v1(i) - up * st.v2(i) - kI * k * q(i) / rho;
    out.v2(i) = adv * st.v2(i) - dq(i) / rho - s.g() * st.r(i) / rho;
    out.r(i) = adv * st.r(i) - rhop * st.v2(i);
  }
  out.v2(0) = out.v2(n - 1) = Complex(0.0, 0.0);  // wall condition
  return out;
}

ModeState project(const ModeState& st, const SteadyState& s, const Grid1D& grid) {
  const int n = grid.n;
  const double h = grid.h, k = st.k;

  // div on interior nodes
  const Eigen::VectorXcd dv2 = diff_op(st.v2, h);
  std::vector<Complex> b(n, Complex(0.0, 0.0));
  for (int i = 1; i + 1 < n; ++i) b[i] = kI * k * st.v1(i) + dv2(i);

  // psi solves  -k^2 psi/rho + D(rho^{-1} D psi) = div  with D psi = 0 at walls,
  // discretized with exactly the centered/one-sided D used by the residual.
  // Unknowns on all n nodes; rows 0 and n-1 are the Neumann constraints.
  BandedMatrix<Complex> mtx(n, 2, 2);
  mtx.at(0, 0) = Complex(-3.0 / (2.0 * h));
  mtx.at(0, 1) = Complex(4.0 / (2.0 * h));
  mtx.at(0, 2) = Complex(-1.0 / (2.0 * h));
  mtx.at(n - 1, n - 1) = Complex(3.0 / (2.0 * h));
  mtx.at(n - 1, n - 2) = Complex(-4.0 / (2.0 * h));
  mtx.at(n - 1, n - 3) = Complex(1.0 / (2.0 * h));

  // row i (interior): -k^2/rho_i psi_i + (D w)_i with w_j = psi'_j / rho_j.
  // Expand (D w)_i = (w_{i+1} - w_{i-1})/(2h), and w_j via centered or
  // one-sided D at the walls.
  const auto rho_at = [&](int j) { return s.rho0(grid.x[j]); };
  const auto add = [&](int i, int j, Complex v) { mtx.at(i, j) += v; };
  for (int i = 1; i + 1 < n; ++i) {
    add(i, i, Complex(-k * k / rho_at(i)));
    // + w_{i+1} / (2h)
    {
      const int j = i + 1;
      const double c = 1.0 / (2.0 * h * rho_at(j));
      if (j == n - 1) {
        add(i, n - 1, Complex(c * 3.0 / (2.0 * h)));
        add(i, n - 2, Complex(-c * 4.0 / (2.0 * h)));
        add(i, n - 3, Complex(c * 1.0 / (2.0 * h)));
      } else {
        add(i, j + 1, Complex(c / (2.0 * h)));
        add(i, j - 1, Complex(-c / (2.0 * h)));
      }
    }
    // - w_{i-1} / (2h)
    {
      const int j = i - 1;
      const double c = -1.0 / (2.0 * h * rho_at(j));
      if (j == 0) {
        add(i, 0, Complex(-c * 3.0 / (2.0 * h)));
        add(i, 1, Complex(c * 4.0 / (2.0 * h)));
        add(i, 2, Complex(-c * 1.0 / (2.0 * h)));
      } else {
        add(i, j + 1, Complex(c / (2.0 * h)));
        add(i, j - 1, Complex(-c / (2.0 * h)));
      }
    }
  }
  mtx.factor();
  mtx.solve_inplace(std::span<Complex>(b));

  Eigen::VectorXcd psi(n);
  for (int i = 0; i < n; ++i) psi(i) = b[i];
  const Eigen::VectorXcd dpsi = diff_op(psi, h);

  ModeState out = st;
  for (int i = 0; i < n; ++i) {
    const double rho = rho_at(i);
    out.v1(i) -= kI * k * psi(i) / rho;
    out.v2(i) -= dpsi(i) / rho;
  }
  out.v2(0) = out.v2(n - 1) = Complex(0.0, 0.0);
  return out;
}

namespace {
double state_norm(const ModeState& st, double h) {
  double acc = 0.0;
  for (int i = 0; i < st.v1.size(); ++i)
    acc += std::norm(st.v1(i)) + std::norm(st.v2(i)) + std::norm(st.r(i));
  return std::sqrt(h * acc);
}

double velocity_norm(const ModeState& st, double h) {
  double acc = 0.0;
  for (int i = 0; i < st.v1.size(); ++i) acc += std::norm(st.v1(i)) + std::norm(st.v2(i));
  return std::sqrt(h * acc);
}

bool state_finite(const ModeState& st) {
  for (int i = 0; i < st.v1.size(); ++i) {
    if (!std::isfinite(st.v1(i).real()) || !std::isfinite(st.v1(i).imag()) ||
        !std::isfinite(st.v2(i).real()) || !std::isfinite(st.v2(i).imag()) ||
        !std::isfinite(st.r(i).real()) || !std::isfinite(st.r(i).imag()))
      return false;
  }
  return true;
}

ModeState axpy(const ModeState& a, double c, const ModeState& b) {
  ModeState out = a;
  out.v1 += c * b.v1;
  out.v2 += c * b.v2;
  out.r += c * b.r;
  out.t += c * b.t;
  return out;
}
}  // namespace

std::pair<ModeState, GrowthReport> evolve(const ModeState& state0, double T,
                                          const SteadyState& s, const Grid1D& grid,
                                          const EvolveOptions& opt) {
  if (T <= 0.0) throw std::invalid_argument("evolve: T must be positive");
  if (state0.k < 1) throw std::invalid_argument("evolve: k must be >= 1");
  if (opt.fit_window_fraction < 0.2 || opt.fit_window_fraction > 1.0)
    throw std::invalid_argument("evolve: fit window must cover 20%..100% of the run");
  double umax = 0.0;
  for (double y : grid.x) umax = std::max(umax, std::abs(s.U(y)));
  const double dt_cap = opt.cfl * grid.h / std::max(umax, 1.0);
  const double dt = opt.dt > 0.0 ? opt.dt : dt_cap;
  if (dt > dt_cap * (1.0 + 1e-12))
    throw std::invalid_argument("evolve: dt exceeds the CFL cap");

  const long nsteps = static_cast<long>(std::ceil(T / dt - 1e-9));
  ModeState st = state0;
  GrowthReport rep;
  rep.window_fraction = opt.fit_window_fraction;

  auto record = [&](const ModeState& state) {
    rep.times.push_back(state.t);
    rep.log_norm.push_back(std::log(state_norm(state, grid.h)));
    rep.div_residual.push_back(divergence_residual(state, grid));
    rep.norm_v.push_back(velocity_norm(state, grid.h));
  };
  record(st);

  for (long step = 0; step < nsteps; ++step) {
    const double h_step = std::min(dt, T - st.t);
    const ModeState k1 = rhs(st, s, grid);
    const ModeState k2 = rhs(axpy(st, 0.5 * h_step, k1), s, grid);
    const ModeState k3 = rhs(axpy(st, 0.5 * h_step, k2), s, grid);
    const ModeState k4 = rhs(axpy(st, h_step, k3), s, grid);
    ModeState next = st;
    next.v1 += (h_step / 6.0) * (k1.v1 + 2.0 * k2.v1 + 2.0 * k3.v1 + k4.v1);
    next.v2 += (h_step / 6.0) * (k1.v2 + 2.0 * k2.v2 + 2.0 * k3.v2 + k4.v2);
    next.r += (h_step / 6.0) * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
    next.t = st.t + h_step;
    next.v2(0) = next.v2(grid.n - 1) = Complex(0.0, 0.0);
    if (opt.project_each_step) next = project(next, s, grid);
    if (!state_finite(next))
      throw std::runtime_error("evolve: non-finite state at t = " + std::to_string(st.t));
    st = next;
    if (step % opt.record_stride == opt.record_stride - 1 || step == nsteps - 1) record(st);
  }

  rep.rate = growth_rate(rep.times, rep.log_norm, opt.fit_window_fraction, &rep.fit_residual);
  return {st, rep};
}

double growth_rate(const std::vector<double>& times, const std::vector<double>& log_norm,
                   double window_fraction, double* fit_residual) {
  if (times.size() != log_norm.size() || times.empty())
    throw std::invalid_argument("growth_rate: bad series");
  const double t_end = times.back();
  const double t_start = t_end - window_fraction * (t_end - times.front());
  size_t first = 0;
  while (first < times.size() && times[first] < t_start - 1e-12) ++first;
  const size_t count = times.size() - first;
  if (count < 10) throw std::invalid_argument("growth_rate: fewer than 10 samples in window");

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (size_t i = first; i < times.size(); ++i) {
    st += times[i];
    sy += log_norm[i];
    stt += times[i] * times[i];
    sty += times[i] * log_norm[i];
  }
  const double nd = static_cast<double>(count);
  const double denom = nd * stt - st * st;
  if (denom == 0.0) throw std::invalid_argument("growth_rate: degenerate window");
  const double slope = (nd * sty - st * sy) / denom;
  if (fit_residual) {
    const double intercept = (sy - slope * st) / nd;
    double ss = 0.0;
    for (size_t i = first; i < times.size(); ++i) {
      const double e = log_norm[i] - (intercept + slope * times[i]);
      ss += e * e;
    }
    *fit_residual = std::sqrt(ss / nd);
  }
  return slope;
}

ModeState eigenmode_state(const EigenSolution& mode, const SteadyState& s,
                          const Grid1D& grid) {
  if (mode.stable) throw std::invalid_argument("eigenmode_state: stable marker has no mode");
  const int n = grid.n;
  ModeState st;
  st.k = mode.k;
  st.t = 0.0;
  Eigen::VectorXcd phi(n);
  for (int i = 0; i < n; ++i) phi(i) = mode.phi[i];
  st.v1 = -diff_op(phi, grid.h);
  st.v2 = kI * static_cast<double>(mode.k) * phi;
  st.r.resize(n);
  const auto rr = recover_r(s, grid, mode.phi, mode.c, mode.eps);
  for (int i = 0; i < n; ++i) st.r(i) = rr[i];
  st.v2(0) = st.v2(n - 1) = Complex(0.0, 0.0);
  return st;
}

namespace {
// Deterministic uniform in [0, 1) from splitmix-advanced state, independent of
// the standard library's distribution implementations.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}
  double uniform() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  Complex gaussian() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    return {rad * std::cos(2.0 * M_PI * u2), rad * std::sin(2.0 * M_PI * u2)};
  }
};
}  // namespace

ModeState random_state(int k, const Grid1D& grid, std::uint64_t seed, double envelope_width) {
  if (k < 1) throw std::invalid_argument("random_state: k must be >= 1");
  const int n = grid.n;
  Rng rng(seed);
  ModeState st;
  st.k = k;
  st.t = 0.0;
  st.v1 = Eigen::VectorXcd::Zero(n);
  st.v2 = Eigen::VectorXcd::Zero(n);
  st.r = Eigen::VectorXcd::Zero(n);
  for (int i = 1; i + 1 < n; ++i) {
    const double env = std::exp(-std::pow(grid.x[i] / envelope_width, 2));
    st.v2(i) = env * rng.gaussian();
    st.r(i) = env * rng.gaussian();
  }
  // v1 from the divergence-free condition: i k v1 + D v2 = 0
  st.v1 = (kI / static_cast<double>(k)) * diff_op(st.v2, grid.h);
  return st;
}

WavepacketReport wavepacket_run(const SteadyState& s, const Grid1D& grid, double x20,
                                const Eigen::Vector2d& xi0, const Eigen::Vector3d& b0,
                                double delta, double T, const EvolveOptions& opt) {
  if (delta <= 0.0) throw std::invalid_argument("wavepacket_run: delta must be positive");
  const double k_real = xi0(0) / delta;
  const double k_round = std::round(k_real);
  if (k_round < 1.0 || std::abs(k_real - k_round) > 1e-9)
    throw std::invalid_argument("wavepacket_run: xi0_1/delta must be a positive integer");
  const int k = static_cast<int>(k_round);

  // snap the packet center to the nearest grid node; the cocycle reference
  // uses the same node
  int node = 0;
  for (int i = 1; i < grid.n; ++i)
    if (std::abs(grid.x[i] - x20) < std::abs(grid.x[node] - x20)) node = i;
  const double xc = grid.x[node];

  ModeState st;
  st.k = k;
  st.t = 0.0;
  st.v1.resize(grid.n);
  st.v2.resize(grid.n);
  st.r.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    const double y = grid.x[i];
    const double env = std::exp(-0.5 * (y - xc) * (y - xc));
    const Complex phase = std::exp(kI * (xi0(1) * y / delta));
    st.v1(i) = b0(0) * env * phase;
    st.v2(i) = b0(1) * env * phase;
    st.r(i) = b0(2) * env * phase;
  }
  st.v2(0) = st.v2(grid.n - 1) = Complex(0.0, 0.0);
  st = project(st, s, grid);

  auto [final_state, growth] = evolve(st, T, s, grid, opt);

  WavepacketReport rep;
  rep.k = k;
  rep.x2_node = xc;
  rep.growth = std::move(growth);
  rep.measured_amp = std::sqrt(std::norm(final_state.v1(node)) +
                               std::norm(final_state.v2(node)) +
                               std::norm(final_state.r(node)));
  const PhasePoint p{xc, xi0};
  const CocycleResult co = integrate_cocycle(p, T, s);
  rep.predicted_amp = (co.B * b0).norm() * std::exp(co.log_scale);
  rep.ratio = rep.measured_amp / rep.predicted_amp;
  rep.mismatch = std::abs(rep.ratio - 1.0);
  return rep;
}

}  // namespace rt
