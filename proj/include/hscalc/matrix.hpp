#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "hscalc/error.hpp"
#include "hscalc/jet.hpp"

namespace hscalc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Dense row-major complex matrix. Values are immutable by convention once a
/// computation hands one out; in-place mutation is confined to construction
/// and factorization scratch copies.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(int d) : d_(d), a_(static_cast<std::size_t>(d) * d, cplx(0.0)) {
    if (d < 1) fail(errc::bad_config, "matrix dimension must be >= 1");
  }

  static ComplexMatrix identity(int d) {
    ComplexMatrix m(d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(const std::vector<cplx>& diag) {
    ComplexMatrix m(static_cast<int>(diag.size()));
    for (int i = 0; i < m.dim(); ++i) m(i, i) = diag[i];
    return m;
  }

  int dim() const { return d_; }
  cplx& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * d_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    const int d = a.d_;
    ComplexMatrix r(d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx(0.0)) continue;
        for (int j = 0; j < d; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

  std::vector<cplx> apply(const std::vector<cplx>& v) const {
    std::vector<cplx> r(static_cast<std::size_t>(d_), cplx(0.0));
    for (int i = 0; i < d_; ++i) {
      cplx s(0.0);
      for (int j = 0; j < d_; ++j) s += (*this)(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }

  ComplexMatrix conjugate_transpose() const {
    ComplexMatrix r(d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  bool finite() const {
    for (const auto& v : a_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

 private:
  int d_ = 0;
  std::vector<cplx> a_;
};

inline double vec_norm2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

/// Spectral norm by power iteration on M*M; falls back to the Frobenius bound
/// when the iteration has not settled ( ||M||_2 <= ||M||_F always holds ).
inline double spectral_norm(const ComplexMatrix& m, int max_steps = 50, double tol = 1e-8) {
  const int d = m.dim();
  if (d == 1) return std::abs(m(0, 0));
  ComplexMatrix g = m.conjugate_transpose() * m;
  std::vector<cplx> v(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) v[i] = cplx(1.0 + 0.1 * i, 0.3 - 0.05 * i);
  double nv = vec_norm2(v);
  for (auto& x : v) x /= nv;
  double lambda = 0.0;
  for (int step = 0; step < max_steps; ++step) {
    std::vector<cplx> w = g.apply(v);
    double nw = vec_norm2(w);
    if (nw == 0.0) return 0.0;
    for (auto& x : w) x /= nw;
    double prev = lambda;
    lambda = nw;
    v = std::move(w);
    if (step > 2 && std::abs(lambda - prev) <= tol * std::max(1.0, lambda))
      return std::sqrt(lambda);
  }
  return std::min(std::sqrt(lambda) * (1.0 + 1e-6), m.frobenius_norm());
}

/// LU factorization with partial pivoting, kept around so a factorization can
/// be reused for several right-hand sides and one refinement pass.
class LuFactorization {
 public:
  explicit LuFactorization(const ComplexMatrix& a) : lu_(a), piv_(static_cast<std::size_t>(a.dim())) {
    const int d = a.dim();
    const double scale = std::max(a.max_abs(), 1e-300);
    for (int k = 0; k < d; ++k) {
      int p = k;
      double best = std::abs(lu_(k, k));
      for (int i = k + 1; i < d; ++i) {
        double v = std::abs(lu_(i, k));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best <= 1e-14 * scale) fail(errc::singular_shift, "pivot below threshold in LU");
      piv_[k] = p;
      if (p != k)
        for (int j = 0; j < d; ++j) std::swap(lu_(k, j), lu_(p, j));
      const cplx inv = 1.0 / lu_(k, k);
      for (int i = k + 1; i < d; ++i) {
        const cplx m = lu_(i, k) * inv;
        lu_(i, k) = m;
        for (int j = k + 1; j < d; ++j) lu_(i, j) -= m * lu_(k, j);
      }
    }
  }

  std::vector<cplx> solve(std::vector<cplx> b) const {
    const int d = lu_.dim();
    // rows were swapped in full during factorization, so all interchanges
    // apply to b before the triangular sweeps
    for (int k = 0; k < d; ++k)
      if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
    for (int k = 0; k < d; ++k)
      for (int i = k + 1; i < d; ++i) b[i] -= lu_(i, k) * b[k];
    for (int i = d - 1; i >= 0; --i) {
      for (int j = i + 1; j < d; ++j) b[i] -= lu_(i, j) * b[j];
      b[i] /= lu_(i, i);
    }
    return b;
  }

  ComplexMatrix solve(const ComplexMatrix& b) const {
    const int d = lu_.dim();
    ComplexMatrix x(d);
    std::vector<cplx> col(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) col[i] = b(i, j);
      col = solve(std::move(col));
      for (int i = 0; i < d; ++i) x(i, j) = col[i];
    }
    return x;
  }

 private:
  ComplexMatrix lu_;
  std::vector<int> piv_;
};

inline ComplexMatrix inverse(const ComplexMatrix& a) {
  LuFactorization lu(a);
  const ComplexMatrix id = ComplexMatrix::identity(a.dim());
  ComplexMatrix x = lu.solve(id);
  // one refinement step
  ComplexMatrix r = id - a * x;
  x += lu.solve(r);
  return x;
}

/// (z - H)^{-1} by LU with partial pivoting and one step of iterative
/// refinement. A real shift is only legal outside a declared spectral
/// enclosure.
inline ComplexMatrix resolvent(const ComplexMatrix& h, cplx z,
                               const std::optional<Interval>& enclosure = std::nullopt) {
  if (z.imag() == 0.0) {
    if (!enclosure)
      fail(errc::real_shift_inside_spectrum, "real shift without a spectral enclosure");
    if (enclosure->contains(z.real()))
      fail(errc::real_shift_inside_spectrum, "real shift inside the spectral enclosure");
  }
  const int d = h.dim();
  ComplexMatrix a(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = (i == j ? z : cplx(0.0)) - h(i, j);
  LuFactorization lu(a);
  const ComplexMatrix id = ComplexMatrix::identity(d);
  ComplexMatrix x = lu.solve(id);
  ComplexMatrix r = id - a * x;
  x += lu.solve(r);
  return x;
}

inline double condition_estimate(const ComplexMatrix& a) {
  return spectral_norm(a) * spectral_norm(inverse(a));
}

/// Householder QR of a random Gaussian matrix; returns the unitary factor with
/// the phase convention diag(R) > 0 so a seed pins the result.
inline ComplexMatrix random_unitary(int d, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix a(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));

  ComplexMatrix q = ComplexMatrix::identity(d);
  for (int k = 0; k < d; ++k) {
    std::vector<cplx> v(static_cast<std::size_t>(d), cplx(0.0));
    double nx = 0.0;
    for (int i = k; i < d; ++i) nx += std::norm(a(i, k));
    nx = std::sqrt(nx);
    if (nx == 0.0) continue;
    cplx akk = a(k, k);
    cplx phase = (akk == cplx(0.0)) ? cplx(1.0) : akk / std::abs(akk);
    cplx alpha = -phase * nx;
    for (int i = k; i < d; ++i) v[i] = a(i, k);
    v[k] -= alpha;
    double nv = vec_norm2(v);
    if (nv < 1e-300) continue;
    for (auto& x : v) x /= nv;
    // a <- (I - 2 v v*) a ; q <- q (I - 2 v v*)
    for (int j = 0; j < d; ++j) {
      cplx s(0.0);
      for (int i = k; i < d; ++i) s += std::conj(v[i]) * a(i, j);
      s *= 2.0;
      for (int i = k; i < d; ++i) a(i, j) -= s * v[i];
    }
    for (int i = 0; i < d; ++i) {
      cplx s(0.0);
      for (int j = k; j < d; ++j) s += q(i, j) * v[j];
      s *= 2.0;
      for (int j = k; j < d; ++j) q(i, j) -= s * std::conj(v[j]);
    }
  }
  // make diag(R) = diag(Q* A_original) positive: absorb phases into Q columns
  for (int k = 0; k < d; ++k) {
    cplx rkk = a(k, k);
    if (rkk == cplx(0.0)) continue;
    cplx ph = rkk / std::abs(rkk);
    for (int i = 0; i < d; ++i) q(i, k) *= ph;
  }
  return q;
}

}  // namespace hscalc
