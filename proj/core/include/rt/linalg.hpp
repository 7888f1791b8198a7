#pragma once

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace rt {

// Symmetric tridiagonal matrix, stored as diagonal + off-diagonal.
struct TridiagSym {
  std::vector<double> diag;  // size n
  std::vector<double> off;   // size n-1

  int size() const { return static_cast<int>(diag.size()); }

  template <typename T>
  std::vector<T> apply(const std::vector<T>& x) const {
    const int n = size();
    std::vector<T> y(n);
    for (int i = 0; i < n; ++i) {
      T v = diag[i] * x[i];
      if (i > 0) v += off[i - 1] * x[i - 1];
      if (i + 1 < n) v += off[i] * x[i + 1];
      y[i] = v;
    }
    return y;
  }
};

// LDL^T factorization of a symmetric positive definite tridiagonal matrix.
// Throws std::runtime_error if a nonpositive pivot is met (matrix not SPD).
class TridiagLDLT {
 public:
  explicit TridiagLDLT(const TridiagSym& m);

  void solve_inplace(std::span<double> b) const;
  void solve_inplace(std::span<std::complex<double>> b) const;
  std::vector<double> solve(std::vector<double> b) const {
    solve_inplace(b);
    return b;
  }

 private:
  std::vector<double> d_, l_;
  template <typename T>
  void solve_impl(std::span<T> b) const;
};

// General banded matrix with kl sub- and ku super-diagonals in LAPACK band
// storage (kl extra rows on top for the pivoting fill-in). Factorization is
// LU with partial pivoting.
template <typename Scalar>
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
        ab_(static_cast<size_t>(ldab_) * n, Scalar(0)) {}

  int size() const { return n_; }

  // A(i, j); valid only for |i - j| within the band.
  Scalar& at(int i, int j) {
    check_band(i, j);
    return ab_[idx(i, j)];
  }
  Scalar at(int i, int j) const {
    check_band(i, j);
    return ab_[idx(i, j)];
  }

  // In-place LU with partial pivoting. Throws on exact singularity.
  void factor();

  void solve_inplace(std::span<Scalar> b) const;
  std::vector<Scalar> solve(std::vector<Scalar> b) const {
    solve_inplace(b);
    return b;
  }

 private:
  size_t idx(int i, int j) const {
    return static_cast<size_t>(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ldab_;
  }
  void check_band(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_ + kl_)
      throw std::out_of_range("BandedMatrix: entry outside band");
  }

  int n_, kl_, ku_, ldab_;
  std::vector<Scalar> ab_;
  std::vector<int> ipiv_;
  bool factored_ = false;
};

extern template class BandedMatrix<double>;
extern template class BandedMatrix<std::complex<double>>;

// Discrete L2 norm and inner product with node weight h.
double grid_norm(std::span<const double> v, double h);
double grid_norm(std::span<const std::complex<double>> v, double h);
std::complex<double> grid_inner(std::span<const std::complex<double>> u,
                                std::span<const std::complex<double>> v, double h);

// Maximizes a unimodal function on [a, b] by golden-section search.
double golden_max(const std::function<double(double)>& f, double a, double b,
                  double xtol = 1e-12);

// Locates a root of f in [a, b] given f(a)*f(b) <= 0, by bisection.
double bisect_root(const std::function<double(double)>& f, double a, double b,
                   double ftol = 1e-12);

}  // namespace rt
