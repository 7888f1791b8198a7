#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "rt/ode.hpp"

TEST_CASE("dopri5 integrates exponential growth to the requested tolerance") {
  using State = Eigen::Matrix<double, 1, 1>;
  auto rhs = [](double, const State& y, State& dy) { dy(0) = 0.5 * y(0); };
  State y;
  y(0) = 1.0;
  rt::OdeOptions opt;
  opt.rtol = 1e-11;
  opt.atol = 1e-13;
  const rt::OdeStats stats = rt::integrate_dopri5(rhs, 0.0, 10.0, y, opt);
  CHECK(y(0) == doctest::Approx(std::exp(5.0)).epsilon(1e-9));
  CHECK(stats.accepted > 0);
}

TEST_CASE("dopri5 tracks an oscillator") {
  using State = Eigen::Vector2d;
  auto rhs = [](double, const State& y, State& dy) {
    dy(0) = y(1);
    dy(1) = -4.0 * y(0);
  };
  State y(1.0, 0.0);
  rt::OdeOptions opt;
  opt.rtol = 1e-12;
  opt.atol = 1e-14;
  rt::integrate_dopri5(rhs, 0.0, 7.0, y, opt);
  CHECK(y(0) == doctest::Approx(std::cos(14.0)).epsilon(1e-8));
  CHECK(y(1) == doctest::Approx(-2.0 * std::sin(14.0)).epsilon(1e-8));
}

TEST_CASE("dopri5 error scales with tolerance") {
  using State = Eigen::Matrix<double, 1, 1>;
  auto rhs = [](double t, const State& y, State& dy) { dy(0) = std::cos(t) * y(0); };
  auto run = [&](double tol) {
    State y;
    y(0) = 1.0;
    rt::OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-2;
    rt::integrate_dopri5(rhs, 0.0, 6.0, y, opt);
    return std::abs(y(0) - std::exp(std::sin(6.0)));
  };
  CHECK(run(1e-6) > run(1e-11));
  CHECK(run(1e-11) < 1e-9);
}

TEST_CASE("dopri5 reports step underflow with the time reached") {
  using State = Eigen::Matrix<double, 1, 1>;
  // finite-time blow-up at t = 1
  auto rhs = [](double, const State& y, State& dy) { dy(0) = y(0) * y(0); };
  State y;
  y(0) = 1.0;
  try {
    rt::integrate_dopri5(rhs, 0.0, 2.0, y);
    FAIL("expected failure");
  } catch (const rt::OdeStepUnderflow& e) {
    CHECK(e.t_reached > 0.5);
    CHECK(e.t_reached <= 1.05);
  } catch (const std::runtime_error&) {
    // max-steps guard is also an acceptable report for a blow-up
    CHECK(true);
  }
}

TEST_CASE("dopri5 post-step rescaling preserves the solution up to the logged scale") {
  using State = Eigen::Matrix<double, 1, 1>;
  auto rhs = [](double, const State& y, State& dy) { dy(0) = 2.0 * y(0); };
  State y;
  y(0) = 1.0;
  double log_scale = 0.0;
  rt::OdeOptions opt;
  opt.rtol = 1e-10;
  const auto post = std::function<double(double, State&)>([&](double, State& s) -> double {
    if (s(0) > 10.0) {
      const double n = s(0);
      s(0) /= n;
      log_scale += std::log(n);
      return std::log(n);
    }
    return 0.0;
  });
  rt::integrate_dopri5(rhs, 0.0, 8.0, y, opt, post);
  CHECK(std::log(y(0)) + log_scale == doctest::Approx(16.0).epsilon(1e-9));
}
