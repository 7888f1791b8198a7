#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace rt {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;   // 0 -> pick from tolerances
  double h_max = 0.0;    // 0 -> span / 2
  long max_steps = 2'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  double err_max = 0.0;  // largest accepted scaled error estimate
};

// Thrown when the controller underflows the step size; carries the time reached.
class OdeStepUnderflow : public std::runtime_error {
 public:
  OdeStepUnderflow(double t, const std::string& what)
      : std::runtime_error(what), t_reached(t) {}
  double t_reached;
};

namespace detail {
inline double scalar_abs(double x) { return std::abs(x); }
template <typename T>
inline double scalar_abs(const std::complex<T>& x) { return std::abs(x); }
}  // namespace detail

// Dormand-Prince 5(4) with standard PI-free step control. State must support
// Eigen-style arithmetic (fixed or dynamic vectors/matrices) and element access
// via a flat index for the error norm.
//
// rhs signature: void rhs(double t, const State& y, State& dydt)
template <typename State, typename Rhs>
OdeStats integrate_dopri5(Rhs&& rhs, double t0, double t1, State& y,
                          const OdeOptions& opt = {},
                          // called after each accepted step; may rescale y and
                          // return the log of the applied scale (0 if none)
                          const std::function<double(double, State&)>& post_step = {}) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  OdeStats stats;
  const double span = t1 - t0;
  if (span < 0) throw std::invalid_argument("integrate_dopri5: t1 < t0");
  if (span == 0) return stats;

  const double hmax = opt.h_max > 0 ? opt.h_max : span / 2;
  double t = t0;
  double h = opt.h_init > 0 ? opt.h_init : std::min(hmax, std::max(1e-6, 1e-2 * span));

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y;
  State ytmp = y, ynew = y;
  rhs(t, y, k1);

  for (long step = 0; step < opt.max_steps; ++step) {
    if (t >= t1) return stats;
    h = std::min({h, hmax, t1 - t});
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw OdeStepUnderflow(t, "integrate_dopri5: step size underflow at t = " + std::to_string(t));

    ytmp = y + (h * a21) * k1;
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + (h * a31) * k1 + (h * a32) * k2;
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + (h * a41) * k1 + (h * a42) * k2 + (h * a43) * k3;
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + (h * a51) * k1 + (h * a52) * k2 + (h * a53) * k3 + (h * a54) * k4;
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + (h * a61) * k1 + (h * a62) * k2 + (h * a63) * k3 + (h * a64) * k4 +
           (h * a65) * k5;
    rhs(t + h, ytmp, k6);
    ynew = y + (h * b1) * k1 + (h * b3) * k3 + (h * b4) * k4 + (h * b5) * k5 +
           (h * b6) * k6;
    rhs(t + h, ynew, k7);

    // scaled RMS error of the embedded 4th order solution
    double err = 0.0;
    const auto ny = static_cast<long>(y.size());
    for (long i = 0; i < ny; ++i) {
      const double ei = detail::scalar_abs(h * (e1 * k1(i) + e3 * k3(i) + e4 * k4(i) +
                                                e5 * k5(i) + e6 * k6(i) + e7 * k7(i)));
      const double sc = opt.atol + opt.rtol * std::max(detail::scalar_abs(y(i)),
                                                       detail::scalar_abs(ynew(i)));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / static_cast<double>(ny));

    if (err <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;  // FSAL
      ++stats.accepted;
      stats.err_max = std::max(stats.err_max, err);
      if (post_step) {
        const double logscale = post_step(t, y);
        if (logscale != 0.0) rhs(t, y, k1);  // rescaling invalidates FSAL
      }
    } else {
      ++stats.rejected;
    }
    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h *= fac;
  }
  throw std::runtime_error("integrate_dopri5: max step count exceeded");
}

}  // namespace rt
