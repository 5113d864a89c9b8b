#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hscalc/almost_analytic.hpp"
#include "hscalc/functions.hpp"
#include "hscalc/matrix.hpp"
#include "hscalc/operators.hpp"
#include "hscalc/seeley.hpp"

namespace hscalc {

/// Discretization of the plane integral. nx and ny double at every
/// refinement level; ny counts midpoint cells per dyadic y-band per sign, so
/// cell height stays proportional to the distance from the real axis and the
/// grid never touches y = 0.
struct QuadratureSpec {
  int nx = 48;
  int ny = 4;
  int refinement_levels = 3;
  double target_tol = 1e-4;
  std::optional<Interval> x_window;  // overrides the certified adaptive window

  void validate() const {
    if (nx < 4 || ny < 4) fail(errc::bad_config, "quadrature needs nx, ny >= 4");
    if (refinement_levels < 1) fail(errc::bad_config, "need at least one level");
    if (!(target_tol > 0.0)) fail(errc::bad_config, "target_tol must be positive");
  }
};

struct CalculusResult {
  ComplexMatrix value;
  double error_estimate = 0.0;  // Richardson difference of the last two levels (+ certified tails)
  int levels_used = 0;
  int n_used = 0;
  long long cells = 0;
  bool converged = false;

  std::string summary() const {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "levels=%d est=%.3e n=%d cells=%lld", levels_used,
                  error_estimate, n_used, cells);
    return buf;
  }
};

inline int& hs_thread_count() {
  static int n = static_cast<int>(std::max(1u, std::min(8u, std::thread::hardware_concurrency())));
  return n;
}

namespace detail {

inline double glue_slope_max(GlueKind glue) {
  auto measure = [](GlueKind g) {
    double m = 0.0;
    for (int i = 1; i < 400; ++i)
      m = std::max(m, std::abs(cutoff_profile(1.0 + i / 400.0, 1, g).coeff(1).real()));
    return m;
  };
  static const double exp_max = measure(GlueKind::exponential);
  static const double tanh_max = measure(GlueKind::tanh_rational);
  return glue == GlueKind::exponential ? exp_max : tanh_max;
}

struct XWindow {
  double lo = 0.0;
  double hi = 0.0;
  double tail_bound = 0.0;
};

/// Certified truncation of the x-range: beyond the window the column mass
/// (weight envelope times the resolvent bound) integrates below tol/10.
/// Constants are sampled from the actual derivatives with a 1.5x margin and
/// the bound is added to the reported error estimate, so the cut is never
/// silent.
inline XWindow hs_x_window(const CkFunction& f, int n, const ResolventBound& bound, double tol,
                           GlueKind glue) {
  if (f.compact()) return {f.support()->lo, f.support()->hi, 0.0};
  const double beta = f.decay_beta();
  if (!(beta < 0.0))
    fail(errc::divergence, "cannot certify the x-window: no decay and no compact support");
  const double nma = n - bound.alpha;
  const double root5a = std::pow(std::sqrt(5.0), bound.alpha);
  const double theta_max = glue_slope_max(glue);
  const double glue_y_int = bound.alpha > 0.0
                                ? (1.0 - std::pow(2.0, -bound.alpha)) / bound.alpha
                                : std::log(2.0);
  for (double X = 16.0; X <= 1.0e8; X *= 2.0) {
    double col_k = 0.0;
    for (int i = 0; i <= 12; ++i)
      for (double sgn : {1.0, -1.0}) {
        const double x = sgn * X * (0.5 + 0.5 * i / 12.0);
        const Jet j = f.jet(x, n + 1);
        const double bx = japanese_bracket(x);
        const double interior = std::abs(j.coeff(n + 1)) * (n + 1) * bound.c * root5a *
                                std::pow(bx, bound.alpha) * std::pow(2.0 * bx, nma) / nma;
        double sbar = 0.0, pw = 1.0;
        for (int r = 0; r <= n; ++r) {
          sbar += std::abs(j.coeff(r)) * pw;
          pw *= 2.0 * bx;
        }
        const double glue_col =
            2.0 * sbar * (1.12 * theta_max / bx) * bound.c * root5a * glue_y_int;
        const double col = (interior + glue_col) / M_PI;
        col_k = std::max(col_k, col * std::pow(bx, 1.0 - beta));
      }
    const double tail = 3.0 * col_k * std::pow(X, beta) / (-beta);
    if (tail < tol / 10.0) return {-X, X, tail};
  }
  fail(errc::divergence, "x-window certification did not settle below 1e8");
}

struct Cell1d {
  double lo = 0.0;
  double hi = 0.0;
};

/// Minimum uniform resolution that resolves the integrand weight envelope:
/// the shortest log-derivative length of the Taylor-sum profile sets the
/// feature scale (steep cutoff ramps concentrate huge high derivatives on a
/// width ~ eps/20 that a plain nx would step straight over). Uniform cells
/// are kept on purpose: the composite midpoint rule telescopes on smooth
/// compactly-supported integrands, which buys well beyond order 2 once the
/// features are resolved.
struct PanelProbe {
  int needed = 0;       // uniform cells that resolve the envelope features
  double split_at = 0;  // quietest interior probe: safe place for a seam
};

inline PanelProbe probe_panel(const CkFunction& f, int n, double lo, double hi) {
  // probe finely enough that the declared feature scale cannot hide between
  // samples
  int probes = 1024;
  if (std::isfinite(f.feature_hint()) && f.feature_hint() > 0.0)
    probes = std::clamp(static_cast<int>(1.5 * (hi - lo) / f.feature_hint()), 1024, 65536);
  const double dx = (hi - lo) / probes;
  std::vector<double> env(probes);
  double env_max = 0.0;
  for (int p = 0; p < probes; ++p) {
    const double x = lo + (hi - lo) * (p + 0.5) / probes;
    const Jet j = f.jet(x, n + 1);
    const double bx2 = 2.0 * japanese_bracket(x);
    double sbar = 0.0, pw = 1.0;
    for (int r = 0; r <= n + 1; ++r) {
      sbar += std::abs(j.coeff(r)) * pw;
      pw *= bx2;
    }
    env[p] = sbar;
    env_max = std::max(env_max, sbar);
  }
  PanelProbe out;
  out.split_at = 0.5 * (lo + hi);
  if (env_max == 0.0) return out;
  // only slopes with real mass matter; ramps fading below 1% of the peak are
  // already absorbed by the telescoping tail of the midpoint rule
  double ell = hi - lo;
  for (int p = 0; p + 1 < probes; ++p) {
    if (env[p] < 1e-2 * env_max || env[p + 1] < 1e-2 * env_max) continue;
    const double dlog = std::abs(std::log(env[p + 1]) - std::log(env[p]));
    if (dlog > 1e-12) ell = std::min(ell, dx / dlog);
  }
  out.needed = static_cast<int>(std::min(65536.0, std::ceil(0.3 * (hi - lo) / ell)));
  // seams must sit where the envelope is quiet: a cut through a derivative
  // spike leaves an h^2 boundary term with an enormous coefficient
  double best = std::numeric_limits<double>::infinity();
  for (int p = probes / 4; p < 3 * probes / 4; ++p)
    if (env[p] < best) {
      best = env[p];
      out.split_at = lo + (hi - lo) * (p + 0.5) / probes;
    }
  return out;
}

/// Locally-uniform panels: a stretch whose probed features would cost more
/// than 256 cells is bisected and re-probed, so multi-scale structure (e.g.
/// dyadic reflection ramps) is resolved where it lives and nowhere else.
/// Within a panel the cells stay uniform, which keeps the midpoint rule's
/// telescoping cancellation on smooth stretches.
inline void build_x_panels(const CkFunction& f, int n, double lo, double hi, int nx_level,
                           int level_scale, double width_total, int depth,
                           std::vector<Cell1d>& out) {
  const PanelProbe probe = probe_panel(f, n, lo, hi);
  if (probe.needed > 256 && depth < 14) {
    build_x_panels(f, n, lo, probe.split_at, nx_level, level_scale, width_total, depth + 1, out);
    build_x_panels(f, n, probe.split_at, hi, nx_level, level_scale, width_total, depth + 1, out);
    return;
  }
  // the feature allocation refines with the level, otherwise the error
  // in steep panels would freeze at the probe floor
  const int baseline = static_cast<int>(std::ceil(nx_level * (hi - lo) / width_total));
  const int cells =
      std::max({1, baseline, std::min(std::min(probe.needed, 4096) * level_scale, 16384)});
  for (int i = 0; i < cells; ++i)
    out.push_back({lo + (hi - lo) * i / cells, lo + (hi - lo) * (i + 1) / cells});
}

/// Panelled core over the spectral/support region, log-graded wings covering
/// the certified decay range.
inline std::vector<Cell1d> build_x_cells(const CkFunction& f, int n, const XWindow& w,
                                         const Interval& core_hint, int nx, int level_scale,
                                         bool compact) {
  std::vector<Cell1d> cells;
  if (!(w.hi > w.lo)) return cells;
  if (compact) {
    build_x_panels(f, n, w.lo, w.hi, nx, level_scale, w.hi - w.lo, 0, cells);
    return cells;
  }
  const double core_lo = std::max(w.lo, std::min(core_hint.lo - 2.0, -6.0));
  const double core_hi = std::min(w.hi, std::max(core_hint.hi + 2.0, 6.0));
  build_x_panels(f, n, core_lo, core_hi, nx, level_scale, core_hi - core_lo, 0, cells);
  const double s = std::max(1.0, (core_hi - core_lo) / 16.0);
  const int nw = std::max(8, nx / 2);
  if (w.hi > core_hi) {
    const double v_max = std::log1p((w.hi - core_hi) / s);
    for (int i = 0; i < nw; ++i)
      cells.push_back({core_hi + s * std::expm1(v_max * i / nw),
                       core_hi + s * std::expm1(v_max * (i + 1) / nw)});
  }
  if (w.lo < core_lo) {
    const double v_max = std::log1p((core_lo - w.lo) / s);
    for (int i = 0; i < nw; ++i)
      cells.push_back({core_lo - s * std::expm1(v_max * (i + 1) / nw),
                       core_lo - s * std::expm1(v_max * i / nw)});
  }
  return cells;
}

inline Interval gershgorin_enclosure(const ComplexMatrix& h) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < h.dim(); ++i) {
    double rad = std::abs(h(i, i).imag());
    for (int j = 0; j < h.dim(); ++j)
      if (j != i) rad += std::abs(h(i, j));
    lo = std::min(lo, h(i, i).real() - rad);
    hi = std::max(hi, h(i, i).real() + rad);
  }
  return {lo, hi};
}

template <typename ColumnFn>
inline ComplexMatrix parallel_column_sum(int dim, int ncols, const ColumnFn& col_fn) {
  const int nthreads = std::max(1, std::min(hs_thread_count(), ncols));
  if (nthreads == 1) {
    ComplexMatrix acc(dim);
    for (int i = 0; i < ncols; ++i) acc += col_fn(i);
    return acc;
  }
  std::vector<ComplexMatrix> parts(static_cast<std::size_t>(nthreads), ComplexMatrix(dim));
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int t = 0; t < nthreads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= ncols) break;
          parts[static_cast<std::size_t>(t)] += col_fn(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(ncols);
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  ComplexMatrix acc(dim);
  for (const auto& p : parts) acc += p;
  return acc;
}

/// One full midpoint pass of -(1/pi) * sum dbar(f~) (z-H)^{-1} dA at the given
/// resolutions. Bands are dyadic toward the axis; the per-column y-range is
/// exactly the cutoff support (0, 2<x>].
inline ComplexMatrix hs_level_pass(const CkFunction& f, const ComplexMatrix& h, int n,
                                   GlueKind glue, const std::vector<Cell1d>& xcells,
                                   int bands, int ny, long long* cells_out) {
  const int d = h.dim();
  std::atomic<long long> cells{0};
  auto column = [&](int ci) {
    const Cell1d& xc = xcells[static_cast<std::size_t>(ci)];
    const double x = 0.5 * (xc.lo + xc.hi);
    const double wx = xc.hi - xc.lo;
    ComplexMatrix acc(d);
    if (wx <= 0.0) return acc;
    const Jet fj = f.jet(x, n + 1);
    if (fj.is_zero()) return acc;
    const double y_top = 2.0 * japanese_bracket(x);
    long long local_cells = 0;
    for (int band = 0; band <= bands; ++band) {
      const double b_hi = y_top * std::pow(0.5, band);
      const double b_lo = (band == bands) ? 0.0 : b_hi * 0.5;
      for (int iy = 0; iy < ny; ++iy) {
        const double y_lo = b_lo + (b_hi - b_lo) * iy / ny;
        const double y_hi = b_lo + (b_hi - b_lo) * (iy + 1) / ny;
        const double wy = y_hi - y_lo;
        const double ym = 0.5 * (y_lo + y_hi);
        for (double sgn : {1.0, -1.0}) {
          const double y = sgn * ym;
          const cplx weight = dbar_from_jet(fj, n, glue, x, y);
          ++local_cells;
          if (weight == cplx(0.0)) continue;
          acc += (weight * wx * wy) * resolvent(h, cplx(x, y));
        }
      }
    }
    cells.fetch_add(local_cells);
    return acc;
  };
  ComplexMatrix total =
      parallel_column_sum(d, static_cast<int>(xcells.size()), column);
  if (cells_out) *cells_out = cells.load();
  return total * cplx(-1.0 / M_PI);
}

}  // namespace detail

/// f(H) = -(1/pi) * integral of dbar(f~)(x,y) (z-H)^{-1} dx dy, by midpoint
/// cells refined until the two-level Richardson difference meets target_tol
/// or the levels are exhausted (the result is still returned, flagged).
inline CalculusResult hs_apply(const CkFunction& f, const ComplexMatrix& h, int n,
                               const QuadratureSpec& quad, const ResolventBound& bound = {},
                               GlueKind glue = GlueKind::exponential) {
  quad.validate();
  if (!(n > bound.alpha))
    fail(errc::insufficient_order, "need n > alpha for a convergent integral");
  if (n + 1 > f.max_order())
    fail(errc::insufficient_order, "need derivatives up to n+1; max_order too small");

  detail::XWindow window;
  if (quad.x_window)
    window = {quad.x_window->lo, quad.x_window->hi, 0.0};
  else
    window = detail::hs_x_window(f, n, bound, quad.target_tol, glue);
  const Interval core_hint = detail::gershgorin_enclosure(h);

  // dyadic depth: band j contributes like 2^{-j(n-alpha)}; stop near 1e-13
  const double nma = std::max(1.0, static_cast<double>(n) - bound.alpha);
  const int bands = std::min(44, std::max(10, static_cast<int>(std::ceil(44.0 / nma))));

  CalculusResult res;
  res.value = ComplexMatrix(h.dim());
  res.n_used = n;
  ComplexMatrix prev(h.dim());
  for (int level = 0; level < quad.refinement_levels; ++level) {
    const int nx = quad.nx << level;
    const int ny = quad.ny << level;
    auto xcells = detail::build_x_cells(f, n, window, core_hint, nx, 1 << level, f.compact());
    long long cells = 0;
    ComplexMatrix value = detail::hs_level_pass(f, h, n, glue, xcells, bands, ny, &cells);
    if (!value.finite()) fail(errc::divergence, "non-finite quadrature accumulation");
    res.cells = cells;
    res.levels_used = level + 1;
    if (level > 0) {
      res.error_estimate = (value - prev).frobenius_norm() + window.tail_bound;
      res.converged = res.error_estimate <= quad.target_tol;
    }
    prev = value;
    res.value = value;
    if (res.converged && level >= 1) break;
  }
  if (quad.refinement_levels == 1) {
    res.error_estimate = window.tail_bound;
    res.converged = false;  // no Richardson certificate from a single level
  }
  return res;
}

/// phi(H) = pi_A(H) + pi_C * I for an extended element phi = (z, f).
inline CalculusResult hs_apply_extended(const ExtendedElement& phi, const ComplexMatrix& h, int n,
                                        const QuadratureSpec& quad,
                                        const ResolventBound& bound = {},
                                        GlueKind glue = GlueKind::exponential) {
  CalculusResult res = hs_apply(phi.fn, h, n, quad, bound, glue);
  res.value += phi.scalar * ComplexMatrix::identity(h.dim());
  return res;
}

/// Boundary + disc decomposition for a bounded operator with spectrum inside
/// [l, u]: a trapezoidal circle contour of f~ plus the midpoint area integral
/// of dbar(f~) over the enclosing disc of radius (u-l)/2 + eps.
inline CalculusResult hs_contour_apply(const CkFunction& f, const ComplexMatrix& b, double eps,
                                       const QuadratureSpec& quad,
                                       std::optional<Interval> enclosure, int n = 2,
                                       const ResolventBound& bound = {},
                                       GlueKind glue = GlueKind::exponential) {
  quad.validate();
  if (!(eps > 0.0)) fail(errc::epsilon_nonpositive, "contour offset eps must be positive");
  if (!enclosure) fail(errc::enclosure_missing, "bounded-operator calculus needs [l,u]");
  if (!(n > bound.alpha)) fail(errc::insufficient_order, "need n > alpha");
  const double l = enclosure->lo, u = enclosure->hi;

  CkFunction fc = f.compact() ? f : f * approx_char(l - 1.0, u + 1.0, 1.0, glue);
  if (n + 1 > fc.max_order()) fail(errc::insufficient_order, "max_order too small");
  AlmostAnalytic aa = make_almost_analytic(fc, n, glue);

  const double c0 = 0.5 * (u + l);
  const double radius = 0.5 * (u - l) + eps;
  const int d = b.dim();

  CalculusResult res;
  res.value = ComplexMatrix(d);
  res.n_used = n;
  ComplexMatrix prev(d);
  for (int level = 0; level < quad.refinement_levels; ++level) {
    const int m_contour = 4 * (quad.nx << level);
    ComplexMatrix contour(d);
    for (int k = 0; k < m_contour; ++k) {
      const double th = 2.0 * M_PI * k / m_contour;
      const cplx z = cplx(c0, 0.0) + std::polar(radius, th);
      const cplx ftil = aa_eval(aa, z.real(), z.imag());
      if (ftil == cplx(0.0)) continue;
      contour += (ftil * std::polar(radius, th)) * resolvent(b, z, enclosure);
    }
    contour *= cplx(1.0 / m_contour);

    const int nr = quad.nx << level;
    const int nth = std::max(32, nr);
    std::atomic<long long> cells{0};
    auto ring = [&](int ri) {
      const double r_lo = radius * ri / nr, r_hi = radius * (ri + 1) / nr;
      const double rm = 0.5 * (r_lo + r_hi), dr = r_hi - r_lo;
      ComplexMatrix acc(d);
      long long local = 0;
      for (int tj = 0; tj < nth; ++tj) {
        const double th = 2.0 * M_PI * (tj + 0.5) / nth;
        const double x = c0 + rm * std::cos(th);
        const double y = rm * std::sin(th);
        const cplx w = aa_dbar(aa, x, y);
        ++local;
        if (w == cplx(0.0)) continue;
        acc += (w * rm * dr * (2.0 * M_PI / nth)) * resolvent(b, cplx(x, y), enclosure);
      }
      cells.fetch_add(local);
      return acc;
    };
    ComplexMatrix area = detail::parallel_column_sum(d, nr, ring);
    ComplexMatrix value = contour + area * cplx(-1.0 / M_PI);
    res.cells = cells.load() + m_contour;
    res.levels_used = level + 1;
    if (level > 0) {
      res.error_estimate = (value - prev).frobenius_norm();
      res.converged = res.error_estimate <= quad.target_tol;
    }
    prev = value;
    res.value = value;
    if (res.converged && level >= 1) break;
  }
  return res;
}

namespace detail {

/// (1/2pi i) closed rectangle contour of the resolvent, composite Gauss
/// panels per side; equals I when the rectangle encloses the spectrum.
inline ComplexMatrix rectangle_contour_identity(const ComplexMatrix& b, double lo, double hi,
                                                double delta) {
  static const double gl_x[4] = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                 0.9305681557970263};
  static const double gl_w[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                 0.1739274225687269};
  const int d = b.dim();
  ComplexMatrix acc(d);
  // corners counterclockwise
  const cplx corners[4] = {cplx(hi, -delta), cplx(hi, delta), cplx(lo, delta), cplx(lo, -delta)};
  for (int side = 0; side < 4; ++side) {
    const cplx z0 = corners[side], z1 = corners[(side + 1) % 4];
    const double len = std::abs(z1 - z0);
    const int panels = std::max(8, static_cast<int>(std::ceil(len / (delta / 3.0))));
    const cplx dz = (z1 - z0) / static_cast<double>(panels);
    for (int p = 0; p < panels; ++p)
      for (int g = 0; g < 4; ++g) {
        const cplx z = z0 + dz * (p + gl_x[g]);
        acc += (gl_w[g] * dz) * resolvent(b, z);
      }
  }
  return acc * (cplx(1.0) / cplx(0.0, 2.0 * M_PI));
}

}  // namespace detail

/// Deviation of chi_{[l',u'],eps}(B) from the identity, computed both through
/// the plane integral and through the rectangle-contour Cauchy route; returns
/// the larger deviation.
inline double char_one_check(const ComplexMatrix& b, double l_prime, double u_prime, double eps,
                             const QuadratureSpec& quad, Interval enclosure,
                             const ResolventBound& bound = {}, double delta = 0.5, int n = 2) {
  if (!(l_prime < enclosure.lo) || !(u_prime > enclosure.hi))
    fail(errc::interval_does_not_enclose_spectrum, "[l',u'] must strictly enclose the spectrum");
  CkFunction chi = approx_char(l_prime, u_prime, eps);
  CalculusResult area = hs_apply(chi, b, n, quad, bound);
  const ComplexMatrix id = ComplexMatrix::identity(b.dim());
  const double dev_area = (area.value - id).frobenius_norm();
  const double dev_rect =
      (detail::rectangle_contour_identity(b, l_prime, u_prime, delta) - id).frobenius_norm();
  return std::max(dev_area, dev_rect);
}

/// gamma_H(f+) := (E f+)(H) for spectra in [0, inf). The result must not
/// depend on the extension; this is checked by recomputing with truncation
/// order K+2 and folding the disagreement into the error estimate.
inline CalculusResult semibounded_apply(const HalfLineFunction& fplus, const ComplexMatrix& h,
                                        const SeeleyCoefficients& coeffs, int n,
                                        const QuadratureSpec& quad, Interval enclosure,
                                        const ResolventBound& bound = {}) {
  if (enclosure.lo < -1e-9)
    fail(errc::spectrum_not_semibounded, "spectral enclosure extends below 0");
  const CkFunction f1 = seeley_extend(fplus, coeffs);
  const CkFunction f2 = seeley_extend(fplus, seeley_coefficients(coeffs.K + 2));
  CalculusResult r1 = hs_apply(f1, h, n, quad, bound);
  CalculusResult r2 = hs_apply(f2, h, n, quad, bound);
  const double disagreement = (r1.value - r2.value).frobenius_norm();
  r1.cells += r2.cells;
  r1.error_estimate = std::max(r1.error_estimate, disagreement);
  r1.converged = r1.converged && r2.converged && disagreement <= 2.0 * quad.target_tol;
  return r1;
}

/// e^{-H^p t} = gamma_H(e^{-s^p t}) for 0 < t <= 1.
inline CalculusResult heat_semigroup(const ComplexMatrix& h, int n_power, double t,
                                     const QuadratureSpec& quad, Interval enclosure,
                                     const ResolventBound& bound = {}, int n = 2) {
  if (n_power < 1) fail(errc::bad_config, "semigroup power must be >= 1");
  if (!(t > 0.0) || t > 1.0) fail(errc::t_out_of_range, "t must lie in (0, 1]");
  const HalfLineFunction fplus = exp_power_half_line(n_power, t);
  return semibounded_apply(fplus, h, seeley_coefficients(n + 3), n, quad, enclosure, bound);
}

}  // namespace hscalc
