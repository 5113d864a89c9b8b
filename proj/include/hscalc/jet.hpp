#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "hscalc/error.hpp"

namespace hscalc {

using cplx = std::complex<double>;

/// Truncated Taylor expansion of a function at a point: coeff(r) = f^(r)(x0)/r!.
/// All recurrences below are the standard Taylor-coefficient propagation rules;
/// they give derivatives of composite expressions to machine precision, which
/// the calculus needs because the integrand consumes f^(r) up to r = n+1.
class Jet {
 public:
  explicit Jet(int order) : c_(static_cast<std::size_t>(order) + 1, cplx(0.0, 0.0)) {}

  static Jet constant(cplx v, int order) {
    Jet j(order);
    j.c_[0] = v;
    return j;
  }

  // The identity function x at the expansion point x0.
  static Jet variable(double x0, int order) {
    Jet j(order);
    j.c_[0] = x0;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  cplx coeff(int r) const { return c_[static_cast<std::size_t>(r)]; }
  cplx& coeff(int r) { return c_[static_cast<std::size_t>(r)]; }
  cplx value() const { return c_[0]; }

  cplx derivative(int r) const {
    double fact = 1.0;
    for (int k = 2; k <= r; ++k) fact *= k;
    return c_[static_cast<std::size_t>(r)] * fact;
  }

  bool is_zero() const {
    for (const auto& v : c_)
      if (v != cplx(0.0, 0.0)) return false;
    return true;
  }

  Jet& operator+=(const Jet& o) {
    for (int r = 0; r <= order(); ++r) c_[r] += o.c_[r];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int r = 0; r <= order(); ++r) c_[r] -= o.c_[r];
    return *this;
  }
  Jet& operator*=(cplx s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(cplx s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, cplx s) {
    a.c_[0] += s;
    return a;
  }
  friend Jet operator+(cplx s, Jet a) { return a + s; }
  friend Jet operator-(Jet a, cplx s) {
    a.c_[0] -= s;
    return a;
  }
  friend Jet operator-(cplx s, const Jet& a) {
    Jet r = a * cplx(-1.0);
    r.c_[0] += s;
    return r;
  }
  friend Jet operator-(const Jet& a) { return a * cplx(-1.0); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (int k = 0; k <= a.order(); ++k) {
      cplx s(0.0, 0.0);
      for (int j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
      r.c_[k] = s;
    }
    return r;
  }

  // q = a / b, requires b(x0) != 0.
  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet q(a.order());
    const cplx b0 = b.c_[0];
    if (b0 == cplx(0.0, 0.0)) fail(errc::divergence, "jet division by zero constant term");
    for (int k = 0; k <= a.order(); ++k) {
      cplx s = a.c_[k];
      for (int j = 1; j <= k; ++j) s -= b.c_[j] * q.c_[k - j];
      q.c_[k] = s / b0;
    }
    return q;
  }

  friend Jet operator/(cplx s, const Jet& b) { return Jet::constant(s, b.order()) / b; }
  friend Jet operator/(Jet a, cplx s) { return a *= (1.0 / s); }

 private:
  std::vector<cplx> c_;
};

inline Jet jet_exp(const Jet& u) {
  Jet e(u.order());
  e.coeff(0) = std::exp(u.coeff(0));
  for (int k = 1; k <= u.order(); ++k) {
    cplx s(0.0, 0.0);
    for (int j = 1; j <= k; ++j) s += static_cast<double>(j) * u.coeff(j) * e.coeff(k - j);
    e.coeff(k) = s / static_cast<double>(k);
  }
  return e;
}

// w = u^p for real exponent p; requires u(x0) real-positive (our use: 1+x^2).
// Recurrence from u w' = p u' w.
inline Jet jet_pow(const Jet& u, double p) {
  Jet w(u.order());
  const cplx u0 = u.coeff(0);
  if (u0 == cplx(0.0, 0.0)) fail(errc::divergence, "jet pow at zero base");
  w.coeff(0) = std::pow(u0, cplx(p, 0.0));
  for (int m = 1; m <= u.order(); ++m) {
    cplx s(0.0, 0.0);
    for (int j = 1; j <= m; ++j) s += p * static_cast<double>(j) * u.coeff(j) * w.coeff(m - j);
    for (int j = 1; j <= m - 1; ++j) s -= static_cast<double>(j) * w.coeff(j) * u.coeff(m - j);
    w.coeff(m) = s / (static_cast<double>(m) * u0);
  }
  return w;
}

inline Jet jet_sqrt(const Jet& u) { return jet_pow(u, 0.5); }

// tanh via exp; saturates to +-1 well before exp(2u) can overflow.
inline Jet jet_tanh(const Jet& u) {
  const double re = u.coeff(0).real();
  if (re > 20.0) return Jet::constant(1.0, u.order());
  if (re < -20.0) return Jet::constant(-1.0, u.order());
  Jet e = jet_exp(u * cplx(2.0));
  return (e - cplx(1.0)) / (e + cplx(1.0));
}

// Polynomial in x with given coefficients (c[0] + c[1] x + ...), expanded at x0.
inline Jet jet_polynomial(const std::vector<cplx>& coeffs, double x0, int order) {
  Jet x = Jet::variable(x0, order);
  Jet acc = Jet::constant(0.0, order);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace hscalc
