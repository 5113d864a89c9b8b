#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <utility>
#include <vector>

#include "hscalc/functions.hpp"

namespace hscalc {

using BigRational = boost::multiprecision::cpp_rational;

/// Sequences {a_k}, {b_k} for the reflection-series extension, truncated at K:
/// b_k = -2^k and the a_k solve sum_k a_k b_k^n = 1 for every n <= K, exactly.
struct SeeleyCoefficients {
  int K = 0;
  std::vector<BigRational> a;
  std::vector<BigRational> b;

  double a_as_double(int k) const { return a[static_cast<std::size_t>(k)].convert_to<double>(); }
  double b_as_double(int k) const { return b[static_cast<std::size_t>(k)].convert_to<double>(); }
};

namespace detail {

/// Exact Gaussian elimination; the Vandermonde matrices here are far from any
/// conditioning trouble once arithmetic is rational.
inline std::vector<BigRational> solve_rational(std::vector<std::vector<BigRational>> m,
                                               std::vector<BigRational> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) fail(errc::singular_conditioner, "rational solve: singular matrix");
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t row = col + 1; row < n; ++row) {
      if (m[row][col] == 0) continue;
      BigRational f = m[row][col] / m[col][col];
      for (std::size_t j = col; j < n; ++j) m[row][j] -= f * m[col][j];
      rhs[row] -= f * rhs[col];
    }
  }
  std::vector<BigRational> x(n);
  for (std::size_t i = n; i-- > 0;) {
    BigRational s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= m[i][j] * x[j];
    x[i] = s / m[i][i];
  }
  return x;
}

}  // namespace detail

/// Solves the (K+1)x(K+1) moment system in exact rational arithmetic.
/// K = 1 gives a = (3, -2).
inline SeeleyCoefficients seeley_coefficients(int K) {
  if (K < 0) fail(errc::bad_config, "seeley_coefficients needs K >= 0");
  if (K > 24) fail(errc::k_too_large, "K > 24: Vandermonde entries reach 2^(K^2)");
  SeeleyCoefficients sc;
  sc.K = K;
  sc.b.resize(static_cast<std::size_t>(K) + 1);
  boost::multiprecision::cpp_int pw = 1;
  for (int k = 0; k <= K; ++k) {
    sc.b[static_cast<std::size_t>(k)] = BigRational(-pw);
    pw *= 2;
  }
  std::vector<std::vector<BigRational>> m(static_cast<std::size_t>(K) + 1,
                                          std::vector<BigRational>(static_cast<std::size_t>(K) + 1));
  std::vector<BigRational> rhs(static_cast<std::size_t>(K) + 1, BigRational(1));
  for (int n = 0; n <= K; ++n)
    for (int k = 0; k <= K; ++k) {
      BigRational p = 1;
      for (int j = 0; j < n; ++j) p *= sc.b[static_cast<std::size_t>(k)];
      m[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] = p;
    }
  sc.a = detail::solve_rational(std::move(m), std::move(rhs));
  return sc;
}

/// Exact residual of the n-th moment identity; zero for every n <= K.
inline BigRational seeley_moment_residual(const SeeleyCoefficients& sc, int n) {
  BigRational s = 0;
  for (std::size_t k = 0; k < sc.a.size(); ++k) {
    BigRational p = 1;
    for (int j = 0; j < n; ++j) p *= sc.b[k];
    s += sc.a[k] * p;
  }
  return s - 1;
}

/// (T_a f)(x) = f(a x) on the half line; a > 0 keeps the domain.
inline HalfLineFunction scale_op(double a, const HalfLineFunction& f) {
  if (!(a > 0.0)) fail(errc::bad_config, "scale_op needs a > 0 on the half line");
  std::optional<Interval> sup;
  if (f.support()) sup = Interval{f.support()->lo / a, f.support()->hi / a};
  auto fn = [a, f](double x, int m) {
    Jet j = f.jet(a * x, m);
    double p = 1.0;
    for (int r = 0; r <= m; ++r) {
      j.coeff(r) *= p;
      p *= a;
    }
    return j;
  };
  return HalfLineFunction(fn, f.max_order(), f.decay_beta(), sup, f.feature_hint() / a);
}

/// (S_phi f)(x) = phi(x) f(x).
inline HalfLineFunction multiply_op(const CkFunction& phi, const HalfLineFunction& f) {
  std::optional<Interval> sup = f.support();
  if (phi.support()) {
    Interval ps{std::max(0.0, phi.support()->lo), std::max(0.0, phi.support()->hi)};
    if (sup)
      sup = Interval{std::max(sup->lo, ps.lo), std::min(sup->hi, ps.hi)};
    else
      sup = ps;
    if (sup->lo > sup->hi) sup = Interval{0.0, 0.0};
  }
  auto fn = [phi, f](double x, int m) { return phi.jet(x, m) * f.jet(x, m); };
  return HalfLineFunction(fn, std::min(phi.max_order(), f.max_order()),
                          phi.decay_beta() + f.decay_beta(), sup,
                          std::min(phi.feature_hint(), f.feature_hint()));
}

/// The cutoff shape used by the extension: 1 on [0,1], 0 beyond [-1,2].
inline CkFunction seeley_cutoff() { return approx_char(0.0, 1.0, 1.0); }

/// Linear extension C^inf[0,inf) -> C^K(R):
///   (E f)(x) = f(x) for x >= 0,  sum_k a_k phi(b_k x) f(b_k x) for x < 0.
/// Only finitely many terms are non-zero since phi kills arguments >= 2.
/// One-sided derivatives match at 0 up to order min(max_order, K).
inline CkFunction seeley_extend(const HalfLineFunction& fplus, const SeeleyCoefficients& coeffs,
                                const CkFunction& phi = seeley_cutoff()) {
  // cutoff shape: 1 on [0,1], 0 for x >= 2 and x <= -1
  for (double x : {0.0, 0.25, 0.5, 1.0})
    if (std::abs(phi.value(x) - 1.0) > 1e-12)
      fail(errc::cutoff_shape_invalid, "phi must equal 1 on [0,1]");
  for (double x : {2.0, 2.5, 5.0, -1.0, -1.5})
    if (std::abs(phi.value(x)) > 1e-12)
      fail(errc::cutoff_shape_invalid, "phi must vanish beyond [-1,2]");

  const int k_out = std::min(fplus.max_order(), phi.max_order());
  std::vector<double> a(coeffs.a.size()), b(coeffs.b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = coeffs.a_as_double(static_cast<int>(k));
    b[k] = coeffs.b_as_double(static_cast<int>(k));
  }

  std::optional<Interval> sup;
  if (fplus.support()) sup = Interval{-2.0, fplus.support()->hi};

  // the k-th reflection compresses structure by |b_k|
  const double b_last = std::abs(b.back());
  const double hint =
      std::min(fplus.feature_hint(), std::min(phi.feature_hint(), 2.0)) / b_last;

  auto fn = [fplus, phi, a, b](double x, int m) -> Jet {
    if (x >= 0.0) return fplus.jet(x, m);
    Jet acc(m);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double arg = b[k] * x;  // > 0
      if (arg >= 2.0) continue;     // phi support exhausted
      Jet term = phi.jet(arg, m) * fplus.jet(arg, m);
      double p = a[k];  // a_k * b_k^r scales the r-th coefficient
      for (int r = 0; r <= m; ++r) {
        term.coeff(r) *= p;
        p *= b[k];
      }
      acc += term;
    }
    return acc;
  };
  return CkFunction(fn, k_out, fplus.decay_beta(), sup, false, hint);
}

}  // namespace hscalc
