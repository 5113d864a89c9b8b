#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "hscalc/functions.hpp"

namespace hscalc {

/// g_s(x) = (f(x) - f(s)) / (x - s), with the removable singularity at s
/// filled by the Taylor expansion of f; g_s^(m)(s) = f^(m+1)(s)/(m+1).
/// Exact for polynomials. Loses one derivative order.
inline CkFunction difference_quotient(const CkFunction& f, double s) {
  if (f.max_order() < 2)
    fail(errc::order_exceeded, "difference_quotient needs max_order >= 2");
  const int k_out = f.max_order() - 1;
  const cplx fs = f.value(s);
  // inside |x-s| <= delta the direct quotient cancels; switch to the series
  const double delta = 0.05;

  auto fn = [f, s, fs, delta](double x, int m) -> Jet {
    if (std::abs(x - s) > delta) {
      Jet num = f.jet(x, m) - fs;
      Jet den = Jet::variable(x, m) - cplx(s);
      return num / den;
    }
    const int q = std::min(f.max_order(), m + 9);
    Jet at_s = f.jet(s, q);
    std::vector<cplx> poly(static_cast<std::size_t>(q));
    for (int j = 1; j <= q; ++j) poly[static_cast<std::size_t>(j - 1)] = at_s.coeff(j);
    return jet_polynomial(poly, x - s, m);
  };

  std::optional<Interval> sup;
  double beta = -1.0;
  if (f.compact() && std::abs(fs) == 0.0) {
    sup = Interval{std::min(f.support()->lo, s), std::max(f.support()->hi, s)};
    beta = f.decay_beta();
  }
  return CkFunction(fn, k_out, beta, sup, f.approximate(), f.feature_hint());
}

/// Curve joining two non-zero points without passing through the origin:
/// modulus and argument are interpolated separately, so |Gamma| stays at or
/// above min(|z|,|w|).
inline cplx gamma_join(cplx z, cplx w, double alpha) {
  if (z == cplx(0.0) || w == cplx(0.0))
    fail(errc::zero_endpoint, "gamma_join endpoints must be non-zero");
  const double mod = (1.0 - alpha) * std::abs(z) + alpha * std::abs(w);
  const double arg = (1.0 - alpha) * std::arg(z) + alpha * std::arg(w);
  return std::polar(mod, arg);
}

namespace detail {

inline Jet gamma_join_jet(cplx z, cplx w, const Jet& alpha) {
  const Jet mod = Jet::constant(std::abs(z), alpha.order()) + alpha * cplx(std::abs(w) - std::abs(z));
  const Jet arg = Jet::constant(std::arg(z), alpha.order()) + alpha * cplx(std::arg(w) - std::arg(z));
  return mod * jet_exp(arg * cplx(0.0, 1.0));
}

}  // namespace detail

/// Smoothly reroutes f on [a,b] so the result never takes the value lambda
/// there, while f and all derivatives are preserved at and outside {a, b}.
/// Construction: blend toward the Gamma-curve through (f(a)-lambda, f(b)-lambda),
/// with the blend width found by scanning for lambda-free margins.
inline CkFunction rejoin_avoiding(const CkFunction& f, Interval interval, cplx lambda) {
  const double a = interval.lo, b = interval.hi;
  if (!(a < b)) fail(errc::interval_inverted, "rejoin_avoiding needs a < b");
  const cplx fa = f.value(a), fb = f.value(b);
  const double scale = std::max({1.0, std::abs(fa), std::abs(fb)});
  if (std::abs(fa - lambda) < 1e-12 * scale || std::abs(fb - lambda) < 1e-12 * scale)
    fail(errc::endpoint_hits_lambda, "f equals lambda at an interval endpoint");

  // If f never meets lambda on [a,b], keep f (verified on a dense grid).
  const int n_scan = 1000;
  double min_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n_scan; ++i) {
    double x = a + (b - a) * i / n_scan;
    min_dist = std::min(min_dist, std::abs(f.value(x) - lambda));
  }
  if (min_dist > 1e-4 * scale) return f;

  // largest eps <= (b-a)/4 with f != lambda on [a,a+2eps] and [b-2eps,b]
  auto lambda_free_margin = [&](bool from_left) {
    double span = (b - a) / 2.0;
    for (int i = 0; i <= n_scan; ++i) {
      double t = span * i / n_scan;
      double x = from_left ? a + t : b - t;
      if (std::abs(f.value(x) - lambda) < 1e-9 * scale) return t;
    }
    return span;
  };
  double eps = std::min({(b - a) / 4.0, lambda_free_margin(true) / 2.0 * 0.99,
                         lambda_free_margin(false) / 2.0 * 0.99});
  if (!(eps > 0.0)) fail(errc::endpoint_hits_lambda, "no lambda-free margin at the endpoints");

  const int k_out = std::min(f.max_order(), kAnalyticOrderCap);
  for (int attempt = 0; attempt < 24; ++attempt) {
    CkFunction chi = approx_char(a + eps, b - eps, eps);
    auto fn = [f, chi, a, b, lambda, fa, fb](double x, int m) -> Jet {
      if (x <= a || x >= b) return f.jet(x, m);
      Jet alpha = (Jet::variable(x, m) - cplx(a)) * cplx(1.0 / (b - a));
      Jet g = detail::gamma_join_jet(fa - lambda, fb - lambda, alpha) + lambda;
      Jet c = chi.jet(x, m);
      return f.jet(x, m) + c * (g - f.jet(x, m));
    };
    CkFunction h(fn, k_out, f.decay_beta(), f.support(), f.approximate(),
                 std::min(f.feature_hint(), eps / 32.0));

    double min_h = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4000; ++i) {
      double x = a + (b - a) * i / 4000.0;
      min_h = std::min(min_h, std::abs(h.value(x) - lambda));
    }
    if (min_h > 1e-10 * scale) return h;
    eps *= 0.5;
  }
  fail(errc::value_attained, "rejoin blend could not avoid lambda");
}

/// Inverse of (phi - lambda) in the extended algebra:
///   psi = ( 1/(z-lambda),  -f / ((z-lambda)(z-lambda+f)) ),  phi = (z, f).
/// Requires lambda outside the closure of the range of phi.
inline ExtendedElement extended_inverse(const ExtendedElement& phi, cplx lambda) {
  const cplx z = phi.scalar;
  const double scale = std::max(1.0, std::abs(z));
  if (std::abs(z - lambda) < 1e-12 * scale)
    fail(errc::scalar_equals_lambda, "lambda equals the scalar part (value at infinity)");

  // sampled range check: phi(x) must stay away from lambda
  double min_dist = std::abs(z - lambda);
  auto probe = [&](double x) {
    min_dist = std::min(min_dist, std::abs(phi.value(x) - lambda));
  };
  if (phi.fn.compact()) {
    const auto s = *phi.fn.support();
    for (int i = 0; i <= 4000; ++i) probe(s.lo + (s.hi - s.lo) * i / 4000.0);
  } else {
    for (int i = 0; i <= 4000; ++i) probe(-50.0 + 100.0 * i / 4000.0);
    for (int k = 0; k < 200; ++k) {
      double x = 50.0 * std::pow(1.05, k);
      probe(x);
      probe(-x);
    }
  }
  if (min_dist < 1e-10 * std::max(1.0, std::abs(lambda)))
    fail(errc::value_attained, "lambda lies in (the closure of) the range of phi");

  const CkFunction f = phi.fn;
  const cplx w = z - lambda;
  auto fn = [f, w](double x, int m) {
    Jet fj = f.jet(x, m);
    return -fj / ((fj + w) * w);
  };
  CkFunction mu(fn, f.max_order(), f.decay_beta(), f.support(), f.approximate(),
                f.feature_hint());
  return ExtendedElement{1.0 / w, mu};
}

}  // namespace hscalc
