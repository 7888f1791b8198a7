#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rt {

// Analytic steady-state family: shear U(x2), density rho0(x2), gravity g.
// All evaluators are closed-form and pure; safe for concurrent use.
class SteadyState {
 public:
  double U(double y) const;
  double dU(double y) const;
  double d2U(double y) const;
  double rho0(double y) const;
  double drho0(double y) const;
  double d2rho0(double y) const;

  double g() const { return g_; }
  double rho_plus() const { return rho_plus_; }
  double rho_minus() const { return rho_minus_; }
  const std::string& family() const { return tag_; }

  // Same density and gravity, U == 0. Used for hydrostatic comparisons.
  SteadyState hydrostatic_copy() const;

 private:
  enum class Kind { P1, P2, P3, Uniform, Stable };
  friend SteadyState make_profile(const std::string&, const std::vector<double>&, double);

  Kind kind_ = Kind::P1;
  std::string tag_ = "P1";
  double width_ = 1.0;   // layer width of both U and rho0
  double rho_c_ = 2.0;   // density offset; rho0 = rho_c +/- tanh(y/width)
  double g_ = 1.0;
  double rho_plus_ = 3.0, rho_minus_ = 1.0;
  bool zero_u_ = false;
};

// Uniform grid on [-L, L].
struct Grid1D {
  double L = 20.0;
  int n = 801;
  double h = 0.05;
  std::vector<double> x;

  static Grid1D uniform(double L, int n);
};

// Families:
//   "P1"      hydrostatic: U = 0,            rho0 = rho_c + tanh(y/w)
//   "P2"      monotone shear: U = tanh(y/w), rho0 = rho_c + tanh(y/w)
//   "P3"      critical shear: U = tanh^2(y/w), same rho0
//   "uniform" U = 0, rho0 = const (params: [rho])
//   "stable"  U = 0, rho0 = rho_c - tanh(y/w)
// params for P1/P2/P3/stable: [] or [w] or [w, rho_c]; w > 0, rho_c >= 1.
SteadyState make_profile(const std::string& family, const std::vector<double>& params = {},
                         double g = 1.0);

struct AssumptionCheck {
  std::string name;
  bool pass = false;
  double worst_x = 0.0;      // node where the worst value occurs
  double worst_value = 0.0;  // the offending value
  double threshold = 0.0;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool all_pass = false;
};

// Checks rho0 > 0 (including the limits rho+/-) on the grid and decay of
// U', U'', rho0', rho0'' below tol at both truncation ends.
ValidationReport validate_assumptions(const SteadyState& s, const Grid1D& grid, double tol);

struct CriticalPoints {
  bool all_critical = false;                     // U == 0: every point critical
  std::vector<std::pair<double, double>> points; // (x2*, rho0'(x2*))
};

// All roots of U' in [-L, L]: sign-change bracketing plus bisection, plus a
// sweep for tangential zeros at interior local minima of |U'|.
CriticalPoints critical_points(const SteadyState& s, const Grid1D& grid);

}  // namespace rt
