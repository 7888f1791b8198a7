#include "rt/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rt/linalg.hpp"

namespace rt {

namespace {
double sech2(double z) {
  const double s = 1.0 / std::cosh(z);
  return s * s;
}
}  // namespace

double SteadyState::U(double y) const {
  if (zero_u_) return 0.0;
  const double z = y / width_;
  switch (kind_) {
    case Kind::P2: return std::tanh(z);
    case Kind::P3: { const double t = std::tanh(z); return t * t; }
    default: return 0.0;
  }
}

double SteadyState::dU(double y) const {
  if (zero_u_) return 0.0;
  const double z = y / width_;
  switch (kind_) {
    case Kind::P2: return sech2(z) / width_;
    case Kind::P3: return 2.0 * std::tanh(z) * sech2(z) / width_;
    default: return 0.0;
  }
}

double SteadyState::d2U(double y) const {
  if (zero_u_) return 0.0;
  const double z = y / width_;
  const double w2 = width_ * width_;
  switch (kind_) {
    case Kind::P2: return -2.0 * std::tanh(z) * sech2(z) / w2;
    case Kind::P3: {
      const double t = std::tanh(z), s2 = sech2(z);
      return 2.0 * s2 * (s2 - 2.0 * t * t) / w2;
    }
    default: return 0.0;
  }
}

double SteadyState::rho0(double y) const {
  const double z = y / width_;
  switch (kind_) {
    case Kind::Uniform: return rho_c_;
    case Kind::Stable: return rho_c_ - std::tanh(z);
    default: return rho_c_ + std::tanh(z);
  }
}

double SteadyState::drho0(double y) const {
  const double z = y / width_;
  switch (kind_) {
    case Kind::Uniform: return 0.0;
    case Kind::Stable: return -sech2(z) / width_;
    default: return sech2(z) / width_;
  }
}

double SteadyState::d2rho0(double y) const {
  const double z = y / width_;
  const double w2 = width_ * width_;
  switch (kind_) {
    case Kind::Uniform: return 0.0;
    case Kind::Stable: return 2.0 * std::tanh(z) * sech2(z) / w2;
    default: return -2.0 * std::tanh(z) * sech2(z) / w2;
  }
}

SteadyState SteadyState::hydrostatic_copy() const {
  SteadyState out = *this;
  out.zero_u_ = true;
  return out;
}

Grid1D Grid1D::uniform(double L, int n) {
  if (L <= 0.0) throw std::invalid_argument("Grid1D: L must be positive");
  if (n < 3) throw std::invalid_argument("Grid1D: n must be at least 3");
  Grid1D g;
  g.L = L;
  g.n = n;
  g.h = 2.0 * L / (n - 1);
  g.x.resize(n);
  for (int i = 0; i < n; ++i) g.x[i] = -L + g.h * i;
  g.x[n - 1] = L;  // pin the endpoint exactly
  return g;
}

SteadyState make_profile(const std::string& family, const std::vector<double>& params, double g) {
  SteadyState s;
  s.tag_ = family;
  s.g_ = g;
  if (g <= 0.0) throw std::invalid_argument("make_profile: g must be positive");

  if (family == "P1" || family == "P2" || family == "P3" || family == "stable") {
    s.kind_ = family == "P1" ? SteadyState::Kind::P1
            : family == "P2" ? SteadyState::Kind::P2
            : family == "P3" ? SteadyState::Kind::P3
                             : SteadyState::Kind::Stable;
    if (params.size() > 2) throw std::invalid_argument("make_profile: expected at most 2 parameters");
    s.width_ = params.size() > 0 ? params[0] : 1.0;
    s.rho_c_ = params.size() > 1 ? params[1] : 2.0;
    if (s.width_ <= 0.0) throw std::invalid_argument("make_profile: layer width must be positive");
    if (s.rho_c_ < 1.0) throw std::invalid_argument("make_profile: rho_c must be >= 1 (rho would vanish)");
    if (s.kind_ == SteadyState::Kind::Stable) {
      s.rho_plus_ = s.rho_c_ - 1.0;
      s.rho_minus_ = s.rho_c_ + 1.0;
    } else {
      s.rho_plus_ = s.rho_c_ + 1.0;
      s.rho_minus_ = s.rho_c_ - 1.0;
    }
  } else if (family == "uniform") {
    s.kind_ = SteadyState::Kind::Uniform;
    if (params.size() > 1) throw std::invalid_argument("make_profile: expected at most 1 parameter");
    s.rho_c_ = params.empty() ? 2.0 : params[0];
    if (s.rho_c_ <= 0.0) throw std::invalid_argument("make_profile: density must be positive");
    s.rho_plus_ = s.rho_minus_ = s.rho_c_;
  } else {
    throw std::invalid_argument("make_profile: unknown family '" + family + "'");
  }
  return s;
}

ValidationReport validate_assumptions(const SteadyState& s, const Grid1D& grid, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("validate_assumptions: tol must be positive");
  ValidationReport rep;

  // positivity of rho0 on nodes and of the limits
  AssumptionCheck pos{"rho0_positive", true, 0.0, 0.0, 0.0};
  double worst = std::min(s.rho_plus(), s.rho_minus());
  double worst_x = s.rho_plus() <= s.rho_minus() ? grid.L : -grid.L;
  for (double y : grid.x) {
    const double r = s.rho0(y);
    if (r < worst) {
      worst = r;
      worst_x = y;
    }
  }
  pos.worst_value = worst;
  pos.worst_x = worst_x;
  pos.pass = worst > 0.0;
  rep.checks.push_back(pos);

  // decay of the profile derivatives at the truncation ends
  struct Deriv {
    const char* name;
    double (SteadyState::*eval)(double) const;
  };
  const Deriv derivs[] = {{"dU_decay", &SteadyState::dU},
                          {"d2U_decay", &SteadyState::d2U},
                          {"drho0_decay", &SteadyState::drho0},
                          {"d2rho0_decay", &SteadyState::d2rho0}};
  for (const auto& d : derivs) {
    const double left = std::abs((s.*d.eval)(-grid.L));
    const double right = std::abs((s.*d.eval)(grid.L));
    AssumptionCheck c{d.name, true, 0.0, 0.0, tol};
    c.worst_value = std::max(left, right);
    c.worst_x = left >= right ? -grid.L : grid.L;
    c.pass = c.worst_value < tol;
    rep.checks.push_back(c);
  }

  rep.all_pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                             [](const AssumptionCheck& c) { return c.pass; });
  return rep;
}

CriticalPoints critical_points(const SteadyState& s, const Grid1D& grid) {
  CriticalPoints out;
  std::vector<double> up(grid.n);
  double max_abs = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    up[i] = s.dU(grid.x[i]);
    max_abs = std::max(max_abs, std::abs(up[i]));
  }
  if (max_abs <= 1e-14) {
    out.all_critical = true;
    return out;
  }

  auto push_root = [&](double y) {
    for (const auto& p : out.points)
      if (std::abs(p.first - y) < grid.h) return;
    out.points.emplace_back(y, s.drho0(y));
  };

  const auto f = [&](double y) { return s.dU(y); };
  for (int i = 0; i + 1 < grid.n; ++i) {
    if (up[i] == 0.0) {
      push_root(grid.x[i]);
    } else if (up[i] * up[i + 1] < 0.0) {
      push_root(bisect_root(f, grid.x[i], grid.x[i + 1], 1e-13));
    }
  }
  if (up[grid.n - 1] == 0.0) push_root(grid.x[grid.n - 1]);

  // tangential zeros: interior strict local minima of |U'| below 1e-8
  for (int i = 1; i + 1 < grid.n; ++i) {
    const double a = std::abs(up[i - 1]), b = std::abs(up[i]), c = std::abs(up[i + 1]);
    if (b < 1e-8 && b < a && b < c) {
      const double y = golden_max([&](double t) { return -std::abs(s.dU(t)); },
                                  grid.x[i - 1], grid.x[i + 1], 1e-14);
      if (std::abs(s.dU(y)) < 1e-12) push_root(y);
    }
  }

  std::sort(out.points.begin(), out.points.end());
  return out;
}

}  // namespace rt
