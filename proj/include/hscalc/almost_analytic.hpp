#pragma once

#include <cmath>
#include <complex>

#include "hscalc/functions.hpp"

namespace hscalc {

/// Taylor order for the extension given the resolvent growth exponent alpha;
/// needs n > alpha, one extra order helps the quadrature.
inline int default_taylor_order(double alpha) {
  return static_cast<int>(std::ceil(alpha)) + 2;
}

namespace detail {

// theta(u): 1 on [0,1], 0 on [2,inf), C-infinity glue between.
inline Jet cutoff_profile(double u, int order, GlueKind glue) {
  Jet t = Jet::variable(u, order) - cplx(1.0);
  return Jet::constant(1.0, order) - glue_step(t, glue);
}

}  // namespace detail

/// Plane cutoff tau(x,y) = theta(|y|/<x>): 1 when |y| <= <x>, 0 when |y| >= 2<x>.
inline double cutoff_tau(double x, double y, GlueKind glue = GlueKind::exponential) {
  const double u = std::abs(y) / japanese_bracket(x);
  if (u <= 1.0) return 1.0;
  if (u >= 2.0) return 0.0;
  return detail::cutoff_profile(u, 0, glue).value().real();
}

/// The almost-analytic extension of a base function: the order-n Taylor sum in
/// iy, cut off by tau. The dbar derivative is evaluated in closed form.
struct AlmostAnalytic {
  CkFunction base;
  int order_n = 2;
  GlueKind glue = GlueKind::exponential;
};

inline AlmostAnalytic make_almost_analytic(CkFunction f, int n,
                                           GlueKind glue = GlueKind::exponential) {
  if (n < 0 || n + 1 > f.max_order())
    fail(errc::order_exceeded, "almost-analytic order must satisfy 0 <= n <= max_order-1");
  return AlmostAnalytic{std::move(f), n, glue};
}

/// f~(x,y) = (sum_{r<=n} f^(r)(x) (iy)^r / r!) tau(x,y).
inline cplx aa_eval(const AlmostAnalytic& F, double x, double y) {
  const double u = std::abs(y) / japanese_bracket(x);
  if (u >= 2.0) return cplx(0.0);
  const Jet j = F.base.jet(x, F.order_n);
  cplx sum(0.0);
  cplx iy_pow(1.0);
  const cplx iy(0.0, y);
  for (int r = 0; r <= F.order_n; ++r) {
    sum += j.coeff(r) * iy_pow;  // coeff(r) = f^(r)/r!
    iy_pow *= iy;
  }
  if (u <= 1.0) return sum;
  return sum * detail::cutoff_profile(u, 0, F.glue).value().real();
}

namespace detail {

/// dbar of the extension from a precomputed base jet at x (order >= n+1).
/// The Taylor sum telescopes, leaving
///   (1/2) f^(n+1)(x) (iy)^n / n! * tau  +  (Taylor sum) * dbar tau,
/// with dbar tau evaluated analytically through theta'.
inline cplx dbar_from_jet(const Jet& j, int n, GlueKind glue, double x, double y) {
  const double bx = japanese_bracket(x);
  const double u = std::abs(y) / bx;
  if (u >= 2.0) return cplx(0.0);

  const cplx iy(0.0, y);
  cplx iy_pow(1.0);
  cplx sum(0.0);
  for (int r = 0; r <= n; ++r) {
    sum += j.coeff(r) * iy_pow;
    if (r < n) iy_pow *= iy;
  }
  // iy_pow now holds (iy)^n ; f^(n+1)/n! = coeff(n+1) * (n+1)
  const cplx interior = 0.5 * static_cast<double>(n + 1) * j.coeff(n + 1) * iy_pow;
  if (u <= 1.0) return interior;

  const Jet theta = cutoff_profile(u, 1, glue);
  const double tau = theta.coeff(0).real();
  const double dtheta = theta.coeff(1).real();
  const double du_dx = -x * std::abs(y) / (bx * bx * bx);
  const double du_dy = (y >= 0.0 ? 1.0 : -1.0) / bx;
  const cplx dbar_tau = 0.5 * (dtheta * du_dx + cplx(0.0, 1.0) * dtheta * du_dy);
  return interior * tau + sum * dbar_tau;
}

}  // namespace detail

inline cplx aa_dbar(const AlmostAnalytic& F, double x, double y) {
  if (std::abs(y) >= 2.0 * japanese_bracket(x)) return cplx(0.0);
  const Jet j = F.base.jet(x, F.order_n + 1);
  return detail::dbar_from_jet(j, F.order_n, F.glue, x, y);
}

}  // namespace hscalc
