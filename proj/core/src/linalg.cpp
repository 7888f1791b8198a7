#include "rt/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace rt {

TridiagLDLT::TridiagLDLT(const TridiagSym& m) {
  const int n = m.size();
  if (n < 1) throw std::invalid_argument("TridiagLDLT: empty matrix");
  d_.resize(n);
  l_.resize(n > 0 ? n - 1 : 0);
  d_[0] = m.diag[0];
  if (d_[0] <= 0.0) throw std::runtime_error("TridiagLDLT: matrix not positive definite");
  for (int i = 0; i + 1 < n; ++i) {
    l_[i] = m.off[i] / d_[i];
    d_[i + 1] = m.diag[i + 1] - l_[i] * m.off[i];
    if (d_[i + 1] <= 0.0) throw std::runtime_error("TridiagLDLT: matrix not positive definite");
  }
}

template <typename T>
void TridiagLDLT::solve_impl(std::span<T> b) const {
  const int n = static_cast<int>(d_.size());
  if (static_cast<int>(b.size()) != n) throw std::invalid_argument("TridiagLDLT::solve: size mismatch");
  for (int i = 1; i < n; ++i) b[i] -= l_[i - 1] * b[i - 1];
  for (int i = 0; i < n; ++i) b[i] /= d_[i];
  for (int i = n - 2; i >= 0; --i) b[i] -= l_[i] * b[i + 1];
}

void TridiagLDLT::solve_inplace(std::span<double> b) const { solve_impl(b); }
void TridiagLDLT::solve_inplace(std::span<std::complex<double>> b) const { solve_impl(b); }

template <typename Scalar>
void BandedMatrix<Scalar>::factor() {
  ipiv_.assign(n_, 0);
  const int ku_eff = kl_ + ku_;  // U bandwidth after pivoting
  for (int j = 0; j < n_; ++j) {
    const int km = std::min(kl_, n_ - 1 - j);
    // pivot search in column j, rows j .. j+km
    int p = 0;
    double best = std::abs(ab_[idx(j, j)]);
    for (int i = 1; i <= km; ++i) {
      const double v = std::abs(ab_[idx(j + i, j)]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    ipiv_[j] = j + p;
    if (best == 0.0) throw std::runtime_error("BandedMatrix::factor: singular matrix");
    if (p != 0) {
      const int jc_max = std::min(n_ - 1, j + ku_eff);
      for (int c = j; c <= jc_max; ++c) {
        // swap A(j, c) and A(j+p, c); both are inside the widened band
        std::swap(ab_[idx(j, c)], ab_[idx(j + p, c)]);
      }
    }
    const Scalar piv = ab_[idx(j, j)];
    for (int i = 1; i <= km; ++i) ab_[idx(j + i, j)] /= piv;
    const int jc_max = std::min(n_ - 1, j + ku_eff);
    for (int c = j + 1; c <= jc_max; ++c) {
      const Scalar f = ab_[idx(j, c)];
      if (f != Scalar(0)) {
        for (int i = 1; i <= km; ++i) ab_[idx(j + i, c)] -= ab_[idx(j + i, j)] * f;
      }
    }
  }
  factored_ = true;
}

template <typename Scalar>
void BandedMatrix<Scalar>::solve_inplace(std::span<Scalar> b) const {
  if (!factored_) throw std::logic_error("BandedMatrix::solve: factor() not called");
  if (static_cast<int>(b.size()) != n_) throw std::invalid_argument("BandedMatrix::solve: size mismatch");
  const int ku_eff = kl_ + ku_;
  // forward: apply P and L
  for (int j = 0; j < n_; ++j) {
    if (ipiv_[j] != j) std::swap(b[j], b[ipiv_[j]]);
    const int km = std::min(kl_, n_ - 1 - j);
    for (int i = 1; i <= km; ++i) b[j + i] -= ab_[idx(j + i, j)] * b[j];
  }
  // back substitution with U
  for (int i = n_ - 1; i >= 0; --i) {
    const int jc_max = std::min(n_ - 1, i + ku_eff);
    Scalar s = b[i];
    for (int c = i + 1; c <= jc_max; ++c) s -= ab_[idx(i, c)] * b[c];
    b[i] = s / ab_[idx(i, i)];
  }
}

template class BandedMatrix<double>;
template class BandedMatrix<std::complex<double>>;

double grid_norm(std::span<const double> v, double h) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(h * s);
}

double grid_norm(std::span<const std::complex<double>> v, double h) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(h * s);
}

std::complex<double> grid_inner(std::span<const std::complex<double>> u,
                                std::span<const std::complex<double>> v, double h) {
  if (u.size() != v.size()) throw std::invalid_argument("grid_inner: size mismatch");
  std::complex<double> s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) s += u[i] * std::conj(v[i]);
  return h * s;
}

double golden_max(const std::function<double(double)>& f, double a, double b, double xtol) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

double bisect_root(const std::function<double(double)>& f, double a, double b, double ftol) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) throw std::invalid_argument("bisect_root: no sign change on [a, b]");
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (std::abs(fm) < ftol || 0.5 * (b - a) < 1e-300) return m;
    if (fa * fm <= 0.0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace rt
