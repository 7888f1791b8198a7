#include <doctest.h>

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "rt/linalg.hpp"

using Complex = std::complex<double>;

TEST_CASE("tridiagonal LDLT solves against Eigen dense") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int n = 40;
  rt::TridiagSym m;
  m.diag.resize(n);
  m.off.resize(n - 1);
  for (int i = 0; i < n; ++i) m.diag[i] = 4.0 + uni(rng);
  for (int i = 0; i + 1 < n; ++i) m.off[i] = uni(rng);

  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    dense(i, i) = m.diag[i];
    if (i + 1 < n) dense(i, i + 1) = dense(i + 1, i) = m.off[i];
  }
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = uni(rng);

  rt::TridiagLDLT chol(m);
  std::vector<double> x(b.data(), b.data() + n);
  chol.solve_inplace(std::span<double>(x));

  const Eigen::VectorXd x_ref = dense.ldlt().solve(b);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_ref(i)).epsilon(1e-12));
}

TEST_CASE("tridiagonal LDLT rejects an indefinite matrix") {
  rt::TridiagSym m;
  m.diag = {1.0, -2.0, 1.0};
  m.off = {0.1, 0.1};
  CHECK_THROWS_AS(rt::TridiagLDLT{m}, std::runtime_error);
}

namespace {
template <typename Scalar>
void check_banded_against_dense(int n, int kl, int ku, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto draw = [&]() -> Scalar {
    if constexpr (std::is_same_v<Scalar, Complex>) {
      return Complex(uni(rng), uni(rng));
    } else {
      return uni(rng);
    }
  };

  rt::BandedMatrix<Scalar> band(n, kl, ku);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
      const Scalar v = draw() + (i == j ? Scalar(3) : Scalar(0));
      band.at(i, j) = v;
      dense(i, j) = v;
    }
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b(n);
  for (int i = 0; i < n; ++i) b(i) = draw();

  band.factor();
  std::vector<Scalar> x(b.data(), b.data() + n);
  band.solve_inplace(std::span<Scalar>(x));

  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x_ref = dense.fullPivLu().solve(b);
  for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - x_ref(i)) < 1e-11);
}
}  // namespace

TEST_CASE("banded LU with pivoting matches dense LU") {
  check_banded_against_dense<double>(30, 1, 1, 1);
  check_banded_against_dense<double>(30, 2, 2, 2);
  check_banded_against_dense<double>(25, 3, 1, 3);
  check_banded_against_dense<Complex>(30, 1, 1, 4);
  check_banded_against_dense<Complex>(31, 2, 2, 5);
}

TEST_CASE("banded LU needs pivoting for a zero diagonal") {
  // leading diagonal entry zero: fails without row exchange
  rt::BandedMatrix<double> band(3, 1, 1);
  band.at(0, 0) = 0.0;
  band.at(0, 1) = 1.0;
  band.at(1, 0) = 2.0;
  band.at(1, 1) = 1.0;
  band.at(1, 2) = 0.5;
  band.at(2, 1) = 1.0;
  band.at(2, 2) = 3.0;
  band.factor();
  std::vector<double> b{1.0, 2.0, 3.0};
  band.solve_inplace(std::span<double>(b));
  // verify A x = rhs
  CHECK(0.0 * b[0] + 1.0 * b[1] == doctest::Approx(1.0));
  CHECK(2.0 * b[0] + 1.0 * b[1] + 0.5 * b[2] == doctest::Approx(2.0));
  CHECK(1.0 * b[1] + 3.0 * b[2] == doctest::Approx(3.0));
}

TEST_CASE("golden section maximizer") {
  const double x = rt::golden_max([](double t) { return -(t - 0.3) * (t - 0.3); }, -1.0, 1.0);
  CHECK(x == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("bisection root") {
  const double x = rt::bisect_root([](double t) { return t * t * t - 2.0; }, 0.0, 2.0, 1e-14);
  CHECK(x == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
}
