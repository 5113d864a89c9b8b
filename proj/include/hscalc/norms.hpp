#pragma once

#include <cmath>
#include <functional>

#include "hscalc/functions.hpp"
#include "hscalc/hs_calculus.hpp"

namespace hscalc {

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& g, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& g, double a, double b,
                               double tol, int depth = 48) {
  if (!(b > a)) return 0.0;
  // seed with a few panels so narrow features are not stepped over
  const int panels = 8;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    double x0 = a + (b - a) * p / panels;
    double x1 = a + (b - a) * (p + 1) / panels;
    double f0 = g(x0), f1 = g(x1), fm = g(0.5 * (x0 + x1));
    double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total += adaptive_simpson_rec(g, x0, x1, f0, fm, f1, whole, tol / panels, depth);
  }
  return total;
}

/// Window [-X, X] such that the integral of |f^(r)| <x>^{r-1} beyond it is
/// certifiably below tail_tol, using the decay envelope |f^(r)| <= c <x>^{beta-r}
/// with c estimated from samples (2x margin). Compact support short-circuits.
struct TruncatedWindow {
  double x = 0.0;
  double tail_bound = 0.0;
};

template <typename Fn>
TruncatedWindow certified_window(const Fn& f, int r, double beta, double tail_tol,
                                 bool half_line) {
  if (!(beta < 0.0)) fail(errc::divergence, "no decay: cannot certify a truncation window");
  for (double X = 16.0; X <= 1.0e12; X *= 2.0) {
    double c = 0.0;
    for (int i = 0; i <= 16; ++i) {
      double x = X * (0.5 + 0.5 * i / 16.0);
      double ratio = std::abs(f.derivative(r, x)) * std::pow(japanese_bracket(x), r - beta);
      c = std::max(c, ratio);
      if (!half_line) {
        double ratiom =
            std::abs(f.derivative(r, -x)) * std::pow(japanese_bracket(x), r - beta);
        c = std::max(c, ratiom);
      }
    }
    c *= 2.0;
    // integral_X^inf <x>^{beta-1} dx <= X^beta / (-beta) for X >= 1
    double tail = (half_line ? 1.0 : 2.0) * c * std::pow(X, beta) / (-beta);
    if (tail < tail_tol) return {X, tail};
  }
  fail(errc::divergence, "truncation window exceeded 1e12 without certification");
}

/// Integration over a possibly huge window: a core interval plus dyadic
/// shells, each shell integrated adaptively with a geometric tolerance share.
inline double integrate_shells(const std::function<double(double)>& g, double lo, double hi,
                               double tol) {
  double total = 0.0;
  const double core_lo = std::max(lo, -16.0), core_hi = std::min(hi, 16.0);
  if (core_hi > core_lo) total += adaptive_simpson(g, core_lo, core_hi, tol / 2.0);
  double share = tol / 8.0;
  for (double edge = 16.0; edge < hi; edge *= 2.0) {
    total += adaptive_simpson(g, edge, std::min(hi, edge * 2.0), share);
    share *= 0.75;
  }
  share = tol / 8.0;
  for (double edge = -16.0; edge > lo; edge *= 2.0) {
    total += adaptive_simpson(g, std::max(lo, edge * 2.0), edge, share);
    share *= 0.75;
  }
  return total;
}

}  // namespace detail

/// ||f||_n = sum_{r<=n} integral |f^(r)(x)| <x>^{r-1} dx over R.
/// Throws order-exceeded if n > max_order and divergence when the adaptive
/// truncation cannot be certified (no decay and no compact support).
inline double an_norm(const CkFunction& f, int n, double tol = 1e-8) {
  if (n > f.max_order()) fail(errc::order_exceeded, "an_norm order exceeds max_order");
  double total = 0.0;
  const double term_tol = tol / (2.0 * (n + 1));
  for (int r = 0; r <= n; ++r) {
    double lo, hi;
    if (f.compact()) {
      lo = f.support()->lo;
      hi = f.support()->hi;
    } else {
      auto w = detail::certified_window(f, r, f.decay_beta(), term_tol, false);
      lo = -w.x;
      hi = w.x;
      total += w.tail_bound;
    }
    auto g = [&f, r](double x) {
      return std::abs(f.derivative(r, x)) * std::pow(japanese_bracket(x), r - 1);
    };
    total += f.compact() ? detail::adaptive_simpson(g, lo, hi, term_tol)
                         : detail::integrate_shells(g, lo, hi, term_tol);
  }
  return total;
}

inline double an_norm(const CkFunction& f, int n, const QuadratureSpec& quad) {
  return an_norm(f, n, quad.target_tol);
}

/// Half-line analogue: sum_{r<=n} integral_0^inf |f^(r)| <x>^{r-1} dx.
inline double aplus_norm(const HalfLineFunction& f, int n, double tol = 1e-8) {
  if (n > f.max_order()) fail(errc::order_exceeded, "aplus_norm order exceeds max_order");
  double total = 0.0;
  const double term_tol = tol / (2.0 * (n + 1));
  for (int r = 0; r <= n; ++r) {
    double hi;
    if (f.compact()) {
      hi = f.support()->hi;
    } else {
      auto w = detail::certified_window(f, r, f.decay_beta(), term_tol, true);
      hi = w.x;
      total += w.tail_bound;
    }
    auto g = [&f, r](double x) {
      return std::abs(f.derivative(r, x)) * std::pow(japanese_bracket(x), r - 1);
    };
    total += f.compact() ? detail::adaptive_simpson(g, 0.0, hi, term_tol)
                         : detail::integrate_shells(g, 0.0, hi, term_tol);
  }
  return total;
}

inline double aplus_norm(const HalfLineFunction& f, int n, const QuadratureSpec& quad) {
  return aplus_norm(f, n, quad.target_tol);
}

}  // namespace hscalc
