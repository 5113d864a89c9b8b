#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "hscalc/error.hpp"
#include "hscalc/jet.hpp"
#include "hscalc/matrix.hpp"

namespace hscalc {

inline double japanese_bracket(double x) { return std::sqrt(1.0 + x * x); }
inline double japanese_bracket(cplx z) { return std::sqrt(1.0 + std::norm(z)); }

enum class GlueKind { exponential, tanh_rational };

namespace detail {

// C-infinity ascending step on [0,1]: 0 at t<=0, 1 at t>=1, 1/2 at t=1/2.
// Two distinct kernels so cutoff-independence can be exercised, not assumed.
inline Jet glue_step(const Jet& t, GlueKind kind) {
  const double t0 = t.value().real();
  if (t0 <= 0.0) return Jet::constant(0.0, t.order());
  if (t0 >= 1.0) return Jet::constant(1.0, t.order());
  if (kind == GlueKind::exponential) {
    const Jet e0 = jet_exp(-(cplx(1.0) / t));
    const Jet e1 = jet_exp(-(cplx(1.0) / (cplx(1.0) - t)));
    return e0 / (e0 + e1);
  }
  const Jet w = cplx(1.0) / (cplx(1.0) - t) - cplx(1.0) / t;
  return (cplx(1.0) + jet_tanh(w)) * cplx(0.5);
}

}  // namespace detail

/// An element of the function algebra: a smooth complex-valued function on R
/// carried as a jet evaluator (all derivatives up to max_order at any point),
/// with decay/support metadata used by the norm and quadrature truncation.
class CkFunction {
 public:
  using JetFn = std::function<Jet(double, int)>;

  CkFunction() = default;
  CkFunction(JetFn fn, int max_order, double decay_beta,
             std::optional<Interval> support = std::nullopt, bool approximate = false,
             double feature_hint = std::numeric_limits<double>::infinity())
      : fn_(std::move(fn)),
        max_order_(max_order),
        decay_beta_(decay_beta),
        support_(support),
        approximate_(approximate),
        feature_hint_(feature_hint) {}

  int max_order() const { return max_order_; }
  double decay_beta() const { return decay_beta_; }
  const std::optional<Interval>& support() const { return support_; }
  bool compact() const { return support_.has_value(); }
  bool approximate() const { return approximate_; }
  bool in_algebra() const { return compact() || decay_beta_ < 0.0; }
  /// Smallest length scale at which this function may carry structure; grid
  /// probes finer than this cannot miss features.
  double feature_hint() const { return feature_hint_; }

  Jet jet(double x, int order) const {
    if (order > max_order_)
      fail(errc::order_exceeded, "derivative order " + std::to_string(order) +
                                     " exceeds max_order " + std::to_string(max_order_));
    if (support_ && (x < support_->lo || x > support_->hi)) return Jet(order);
    return fn_(x, order);
  }

  cplx value(double x) const { return jet(x, 0).value(); }
  cplx derivative(int r, double x) const { return jet(x, r).derivative(r); }

  friend CkFunction operator+(const CkFunction& a, const CkFunction& b) {
    std::optional<Interval> sup;
    if (a.support_ && b.support_)
      sup = Interval{std::min(a.support_->lo, b.support_->lo),
                     std::max(a.support_->hi, b.support_->hi)};
    auto fa = a.fn_;
    auto fb = b.fn_;
    auto sa = a.support_;
    auto sb = b.support_;
    auto fn = [fa, fb, sa, sb](double x, int m) {
      Jet r(m);
      if (!sa || (x >= sa->lo && x <= sa->hi)) r += fa(x, m);
      if (!sb || (x >= sb->lo && x <= sb->hi)) r += fb(x, m);
      return r;
    };
    return CkFunction(fn, std::min(a.max_order_, b.max_order_),
                      std::max(a.decay_beta_, b.decay_beta_), sup,
                      a.approximate_ || b.approximate_,
                      std::min(a.feature_hint_, b.feature_hint_));
  }

  friend CkFunction operator*(const CkFunction& a, const CkFunction& b) {
    std::optional<Interval> sup;
    if (a.support_ && b.support_) {
      Interval s{std::max(a.support_->lo, b.support_->lo),
                 std::min(a.support_->hi, b.support_->hi)};
      if (s.lo > s.hi) s = Interval{0.0, 0.0};
      sup = s;
    } else if (a.support_) {
      sup = a.support_;
    } else if (b.support_) {
      sup = b.support_;
    }
    auto fa = a.fn_;
    auto fb = b.fn_;
    auto sa = a.support_;
    auto sb = b.support_;
    // guard: a vanishing factor short-circuits so the other side is never
    // evaluated where it may be undefined (e.g. chi * (1/f))
    auto fn = [fa, fb, sa, sb](double x, int m) {
      if (sa && (x < sa->lo || x > sa->hi)) return Jet(m);
      if (sb && (x < sb->lo || x > sb->hi)) return Jet(m);
      Jet ja = fa(x, m);
      if (ja.is_zero()) return Jet(m);
      return ja * fb(x, m);
    };
    return CkFunction(fn, std::min(a.max_order_, b.max_order_),
                      a.decay_beta_ + b.decay_beta_, sup, a.approximate_ || b.approximate_,
                      std::min(a.feature_hint_, b.feature_hint_));
  }

  friend CkFunction operator*(cplx s, const CkFunction& a) {
    auto fa = a.fn_;
    return CkFunction([fa, s](double x, int m) { return fa(x, m) * s; }, a.max_order_,
                      a.decay_beta_, a.support_, a.approximate_, a.feature_hint_);
  }
  friend CkFunction operator*(const CkFunction& a, cplx s) { return s * a; }
  friend CkFunction operator-(const CkFunction& a, const CkFunction& b) {
    return a + (cplx(-1.0) * b);
  }

 private:
  JetFn fn_;
  int max_order_ = 0;
  double decay_beta_ = 0.0;
  std::optional<Interval> support_;
  bool approximate_ = false;
  double feature_hint_ = std::numeric_limits<double>::infinity();
};

/// Same carrier restricted to [0, inf); derivatives at 0 are one-sided.
class HalfLineFunction {
 public:
  using JetFn = std::function<Jet(double, int)>;

  HalfLineFunction() = default;
  HalfLineFunction(JetFn fn, int max_order, double decay_beta,
                   std::optional<Interval> support = std::nullopt,
                   double feature_hint = std::numeric_limits<double>::infinity())
      : fn_(std::move(fn)),
        max_order_(max_order),
        decay_beta_(decay_beta),
        support_(support),
        feature_hint_(feature_hint) {}

  int max_order() const { return max_order_; }
  double decay_beta() const { return decay_beta_; }
  const std::optional<Interval>& support() const { return support_; }
  bool compact() const { return support_.has_value(); }
  double feature_hint() const { return feature_hint_; }

  Jet jet(double x, int order) const {
    if (x < 0.0) fail(errc::bad_config, "half-line function evaluated at negative point");
    if (order > max_order_) fail(errc::order_exceeded, "half-line order exceeds max_order");
    if (support_ && (x < support_->lo || x > support_->hi)) return Jet(order);
    return fn_(x, order);
  }

  cplx value(double x) const { return jet(x, 0).value(); }
  cplx derivative(int r, double x) const { return jet(x, r).derivative(r); }

 private:
  JetFn fn_;
  int max_order_ = 0;
  double decay_beta_ = 0.0;
  std::optional<Interval> support_;
  double feature_hint_ = std::numeric_limits<double>::infinity();
};

inline HalfLineFunction restrict_to_half_line(const CkFunction& f) {
  auto fn = [f](double x, int m) { return f.jet(x, m); };
  std::optional<Interval> sup = f.support();
  if (sup) sup = Interval{std::max(0.0, sup->lo), std::max(0.0, sup->hi)};
  return HalfLineFunction(fn, f.max_order(), f.decay_beta(), sup, f.feature_hint());
}

/// Element (z, f) of the extended algebra C + A; evaluates to z + f(x).
struct ExtendedElement {
  cplx scalar;
  CkFunction fn;

  cplx value(double x) const { return scalar + fn.value(x); }

  friend ExtendedElement operator+(const ExtendedElement& a, const ExtendedElement& b) {
    return {a.scalar + b.scalar, a.fn + b.fn};
  }
  // (w,f)(z,g) = (wz, wg + zf + fg)
  friend ExtendedElement operator*(const ExtendedElement& a, const ExtendedElement& b) {
    return {a.scalar * b.scalar, a.scalar * b.fn + b.scalar * a.fn + a.fn * b.fn};
  }
};

// ---------------------------------------------------------------------------
// Built-in families. Constructors hand out exact-recurrence jet evaluators.
// ---------------------------------------------------------------------------

constexpr int kAnalyticOrderCap = 32;

inline CkFunction zero_function() {
  return CkFunction([](double, int m) { return Jet(m); }, kAnalyticOrderCap, -1.0,
                    Interval{0.0, 0.0});
}

inline CkFunction constant_function(cplx c) {
  return CkFunction([c](double, int m) { return Jet::constant(c, m); }, kAnalyticOrderCap, 0.0);
}

/// f(x) = (z - x)^{-1}; in the algebra (beta = -1) whenever Im z != 0.
inline CkFunction inverse_linear(cplx z) {
  auto fn = [z](double x, int m) { return cplx(1.0) / (z - Jet::variable(x, m)); };
  return CkFunction(fn, kAnalyticOrderCap, -1.0);
}

/// f(x) = <x>^beta = (1+x^2)^{beta/2}.
inline CkFunction bracket_power(double beta) {
  auto fn = [beta](double x, int m) {
    Jet xj = Jet::variable(x, m);
    return jet_pow(cplx(1.0) + xj * xj, beta / 2.0);
  };
  return CkFunction(fn, kAnalyticOrderCap, beta);
}

inline CkFunction polynomial_function(std::vector<cplx> coeffs) {
  double deg = coeffs.empty() ? 0.0 : static_cast<double>(coeffs.size() - 1);
  auto fn = [c = std::move(coeffs)](double x, int m) { return jet_polynomial(c, x, m); };
  return CkFunction(fn, kAnalyticOrderCap, deg);
}

/// psi_{a,eps}: 1 for x >= a, 0 for x <= a-eps, monotone C-infinity ramp between.
inline CkFunction smooth_step(double a, double eps, GlueKind glue = GlueKind::exponential) {
  if (!(eps > 0.0)) fail(errc::nonpositive_epsilon, "smooth_step requires eps > 0");
  auto fn = [a, eps, glue](double x, int m) {
    Jet t = (Jet::variable(x, m) - cplx(a - eps)) * cplx(1.0 / eps);
    return detail::glue_step(t, glue);
  };
  return CkFunction(fn, kAnalyticOrderCap, 0.0, std::nullopt, false, eps / 32.0);
}

/// Approximate characteristic function of [a,b]: psi_{a,eps} - psi_{b+eps,eps}.
/// Equals 1 on [a,b], supported on [a-eps, b+eps].
inline CkFunction approx_char(double a, double b, double eps,
                              GlueKind glue = GlueKind::exponential) {
  if (a > b) fail(errc::interval_inverted, "approx_char requires a <= b");
  if (!(eps > 0.0)) fail(errc::nonpositive_epsilon, "approx_char requires eps > 0");
  auto fn = [a, b, eps, glue](double x, int m) {
    Jet lo = detail::glue_step((Jet::variable(x, m) - cplx(a - eps)) * cplx(1.0 / eps), glue);
    Jet hi = detail::glue_step((Jet::variable(x, m) - cplx(b)) * cplx(1.0 / eps), glue);
    return lo - hi;
  };
  return CkFunction(fn, kAnalyticOrderCap, -1.0, Interval{a - eps, b + eps}, false, eps / 32.0);
}

/// C-infinity bump supported exactly on [a,b], peak value 1 at the midpoint.
inline CkFunction bump(double a, double b) {
  if (a >= b) fail(errc::interval_inverted, "bump requires a < b");
  const double w = b - a;
  auto fn = [a, w](double x, int m) {
    double t0 = (x - a) / w;
    if (t0 <= 0.0 || t0 >= 1.0) return Jet(m);
    Jet t = (Jet::variable(x, m) - cplx(a)) * cplx(1.0 / w);
    return jet_exp(cplx(4.0) - cplx(1.0) / (t * (cplx(1.0) - t)));
  };
  return CkFunction(fn, kAnalyticOrderCap, -1.0, Interval{a, b}, false, (b - a) / 64.0);
}

inline HalfLineFunction exp_decay_half_line(double rate = 1.0) {
  auto fn = [rate](double x, int m) { return jet_exp(Jet::variable(x, m) * cplx(-rate)); };
  return HalfLineFunction(fn, kAnalyticOrderCap, -4.0);
}

/// f(s) = exp(-t s^p) on the half line (the heat-kernel family).
inline HalfLineFunction exp_power_half_line(int p, double t) {
  auto fn = [p, t](double x, int m) {
    Jet xj = Jet::variable(x, m);
    Jet acc = Jet::constant(1.0, m);
    for (int k = 0; k < p; ++k) acc = acc * xj;
    return jet_exp(acc * cplx(-t));
  };
  return HalfLineFunction(fn, kAnalyticOrderCap, -4.0);
}

/// f(s) = (1+s)^{-1} on the half line.
inline HalfLineFunction inverse_shift_half_line(double shift = 1.0) {
  auto fn = [shift](double x, int m) { return cplx(1.0) / (Jet::variable(x, m) + cplx(shift)); };
  return HalfLineFunction(fn, kAnalyticOrderCap, -1.0);
}

/// Tabulated function: natural cubic spline through (x_i, y_i), constant
/// beyond the table edges. Derivatives come from the spline, so only orders
/// up to 3 are available and the result is flagged approximate.
inline CkFunction custom_table(std::vector<double> xs, std::vector<cplx> ys) {
  const std::size_t n = xs.size();
  if (n < 3 || ys.size() != n) fail(errc::bad_config, "custom_table needs >= 3 matching points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(xs[i] > xs[i - 1])) fail(errc::bad_config, "custom_table abscissae must increase");

  // natural cubic spline second derivatives (complex-valued data)
  std::vector<cplx> m2(n, cplx(0.0)), rhs(n, cplx(0.0));
  std::vector<double> diag(n, 1.0), off(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double h0 = xs[i] - xs[i - 1], h1 = xs[i + 1] - xs[i];
    diag[i] = 2.0 * (h0 + h1);
    off[i] = h1;
    rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
  }
  // tridiagonal sweep (natural ends: m2 first/last = 0)
  std::vector<double> sub(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) sub[i] = xs[i] - xs[i - 1];
  for (std::size_t i = 2; i + 1 < n; ++i) {
    double w = sub[i] / diag[i - 1];
    diag[i] -= w * off[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m2[i] = (rhs[i] - off[i] * m2[i + 1]) / diag[i];
    if (i == 1) break;
  }

  bool zero_edges = std::abs(ys.front()) == 0.0 && std::abs(ys.back()) == 0.0;
  std::optional<Interval> sup;
  if (zero_edges) sup = Interval{xs.front(), xs.back()};
  double min_gap = xs[1] - xs[0];
  for (std::size_t i = 2; i < n; ++i) min_gap = std::min(min_gap, xs[i] - xs[i - 1]);

  auto fn = [xs = std::move(xs), ys = std::move(ys), m2 = std::move(m2)](double x, int m) {
    if (x <= xs.front()) return Jet::constant(ys.front(), m);
    if (x >= xs.back()) return Jet::constant(ys.back(), m);
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    double h = xs[i + 1] - xs[i];
    // cubic on [x_i, x_{i+1}] in u = x - x_i
    cplx c0 = ys[i];
    cplx c2 = m2[i] / 2.0;
    cplx c3 = (m2[i + 1] - m2[i]) / (6.0 * h);
    cplx c1 = (ys[i + 1] - ys[i]) / h - h * (2.0 * m2[i] + m2[i + 1]) / 6.0;
    return jet_polynomial({c0, c1, c2, c3}, x - xs[i], m);
  };
  return CkFunction(fn, 3, zero_edges ? -1.0 : 0.0, sup, /*approximate=*/true, min_gap);
}

}  // namespace hscalc
