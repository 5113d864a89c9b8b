#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hscalc/function_ops.hpp"
#include "hscalc/hs_calculus.hpp"
#include "hscalc/operators.hpp"

namespace hscalc {

struct SmtReport {
  std::string operator_id;
  std::string function_id;
  double forward_defect = 0.0;  // leakage of sigma(phi(H)) outside closure(phi(sigma(H)))
  double reverse_defect = 0.0;  // max_i |Delta_ii - phi(lambda_i)|
  double offdiag_norm = 0.0;
  double quad_estimate = 0.0;

  static std::string csv_header() {
    return "operator_id,function_id,forward_defect,reverse_defect,offdiag_norm,quad_estimate";
  }
  std::string csv_row() const {
    std::ostringstream os;
    os.precision(12);
    os << operator_id << "," << function_id << "," << forward_defect << "," << reverse_defect
       << "," << offdiag_norm << "," << quad_estimate;
    return os.str();
  }
};

/// Conjugates phi(H) back through P and inspects the diagonal: for a
/// diagonalizable test operator exact spectral mapping means the conjugated
/// matrix is diag(phi(lambda_i)) up to quadrature error amplified by kappa(P).
inline SmtReport verify_spectral_mapping(const ExtendedElement& phi, const TestOperator& t, int n,
                                         const QuadratureSpec& quad,
                                         std::string operator_id = "operator",
                                         std::string function_id = "function") {
  CalculusResult calc = hs_apply_extended(phi, t.h(), n, quad, t.bound());
  const int d = t.dim();
  ComplexMatrix delta = t.p_inv() * calc.value * t.p();

  SmtReport rep;
  rep.operator_id = std::move(operator_id);
  rep.function_id = std::move(function_id);
  rep.quad_estimate = calc.error_estimate;

  double off = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) off += std::norm(delta(i, j));
  rep.offdiag_norm = std::sqrt(off);

  std::vector<cplx> mapped;  // closure phi(sigma(H)) plus the value at infinity
  for (double e : t.spectrum()) mapped.push_back(phi.value(e));
  mapped.push_back(phi.scalar);

  for (int i = 0; i < d; ++i) {
    const cplx dii = delta(i, i);
    rep.reverse_defect = std::max(rep.reverse_defect, std::abs(dii - mapped[i]));
    double dist = std::numeric_limits<double>::infinity();
    for (const cplx& m : mapped) dist = std::min(dist, std::abs(dii - m));
    rep.forward_defect = std::max(rep.forward_defect, dist);
  }
  return rep;
}

struct EigvecResidual {
  double residual = 0.0;      // ||f(H) v - f(s) v||_2 for the exact eigenpair
  double two_path_gap = 0.0;  // || (f(H)-f(s))(H+i)^{-1} - g_s(H) k_s(H) ||_F
  double quad_estimate = 0.0;
};

/// The approximate-eigenvector route to the reverse inclusion: an exact
/// eigenpair must give a small residual, and the factorization
/// (f(H)-f(s))(H+i)^{-1} = g_s(H) k_s(H) is evaluated along both paths.
inline EigvecResidual approx_eigvec_residual(const CkFunction& f, const TestOperator& t, double s,
                                             const QuadratureSpec& quad, int n = 2) {
  int idx = -1;
  for (std::size_t i = 0; i < t.spectrum().size(); ++i)
    if (std::abs(t.spectrum()[i] - s) <= 1e-12 * std::max(1.0, std::abs(s)))
      idx = static_cast<int>(i);
  if (idx < 0) fail(errc::not_an_eigenvalue, "s is not in the constructed spectrum");

  const int d = t.dim();
  std::vector<cplx> v(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) v[i] = t.p()(i, idx);
  const double nv = vec_norm2(v);
  for (auto& x : v) x /= nv;

  EigvecResidual out;
  CalculusResult fh = hs_apply(f, t.h(), n, quad, t.bound());
  out.quad_estimate = fh.error_estimate;
  const cplx fs = f.value(s);
  std::vector<cplx> fv = fh.value.apply(v);
  for (int i = 0; i < d; ++i) fv[i] -= fs * v[i];
  out.residual = vec_norm2(fv);

  // direct path: (f(H) - f(s)) (H+i)^{-1};  (H+i)^{-1} = -((-i) - H)^{-1}
  const ComplexMatrix shift_inv = resolvent(t.h(), cplx(0.0, -1.0)) * cplx(-1.0);
  const ComplexMatrix direct =
      (fh.value - fs * ComplexMatrix::identity(d)) * shift_inv;

  // factorized path: g_s(H) k_s(H) with k_s = (1, -(s+i)/(x+i))
  const CkFunction gs = difference_quotient(f, s);
  const ExtendedElement ks{cplx(1.0), cplx(s, 1.0) * inverse_linear(cplx(0.0, -1.0))};
  CalculusResult gsh = hs_apply(gs, t.h(), n, quad, t.bound());
  CalculusResult ksh = hs_apply_extended(ks, t.h(), n, quad, t.bound());
  out.quad_estimate += gsh.error_estimate + ksh.error_estimate;
  out.two_path_gap = (direct - gsh.value * ksh.value).frobenius_norm();
  return out;
}

struct ConvergenceRow {
  int level = 0;
  int nx = 0;
  int ny = 0;
  double frobenius_error = 0.0;
  double richardson = 0.0;
  double wall_ms = 0.0;
};

/// Midpoint refinement study against the exact oracle; midpoint order 2 shows
/// as error ratios near 4 between consecutive levels.
inline std::vector<ConvergenceRow> convergence_table(const CkFunction& f, const TestOperator& t,
                                                     int levels, QuadratureSpec quad, int n = 2) {
  if (levels < 3) fail(errc::bad_config, "convergence table needs at least 3 levels");
  const ComplexMatrix oracle = oracle_apply(t, f);
  std::vector<ConvergenceRow> rows;
  ComplexMatrix prev;
  for (int level = 0; level < levels; ++level) {
    QuadratureSpec q = quad;
    q.nx = quad.nx << level;
    q.ny = quad.ny << level;
    q.refinement_levels = 1;
    const auto t0 = std::chrono::steady_clock::now();
    CalculusResult r = hs_apply(f, t.h(), n, q, t.bound());
    const auto t1 = std::chrono::steady_clock::now();
    ConvergenceRow row;
    row.level = level;
    row.nx = q.nx;
    row.ny = q.ny;
    row.frobenius_error = (r.value - oracle).frobenius_norm();
    row.richardson = level > 0 ? (r.value - prev).frobenius_norm() : 0.0;
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rows.push_back(row);
    prev = r.value;
  }
  return rows;
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os << "level,nx,ny,frobenius_error,richardson,wall_ms\n";
  os.precision(12);
  for (const auto& r : rows)
    os << r.level << "," << r.nx << "," << r.ny << "," << r.frobenius_error << ","
       << r.richardson << "," << r.wall_ms << "\n";
  return os.str();
}

/// Literal construction from the bounded-operator exclusion argument: when
/// phi never takes the value pi_C on sigma(H), reroute the zeros of the
/// function part away from 0 on a slightly enlarged window, then
/// g := -chi / f_rerouted satisfies (pi_C I - phi(H)) g(H) = I.
inline CkFunction bounded_exclusion_witness(const ExtendedElement& phi, const TestOperator& t) {
  const CkFunction& f0 = phi.fn;
  const Interval enc = t.enclosure();

  double eps = 0.5;
  auto strip_clear = [&](double eps_try) {
    for (int i = 0; i <= 200; ++i) {
      double xl = enc.lo - eps_try + eps_try * i / 200.0;
      double xr = enc.hi + eps_try * i / 200.0;
      if (std::abs(f0.value(xl)) < 1e-7 || std::abs(f0.value(xr)) < 1e-7) return false;
    }
    return true;
  };
  while (eps > 1e-6 && !strip_clear(eps)) eps *= 0.5;
  if (!strip_clear(eps)) fail(errc::value_attained, "function part vanishes arbitrarily close to the spectrum");
  const double lp = enc.lo - eps, up = enc.hi + eps;

  // cover the zeros of f0 inside [lp, up] by intervals clear of the spectrum
  const int n_scan = 4000;
  const double step = (up - lp) / n_scan;
  std::vector<Interval> covers;
  bool in_zero = false;
  double z_lo = 0.0;
  for (int i = 0; i <= n_scan; ++i) {
    double x = lp + step * i;
    bool small = std::abs(f0.value(x)) < 1e-6;
    if (small && !in_zero) {
      in_zero = true;
      z_lo = x;
    } else if (!small && in_zero) {
      in_zero = false;
      covers.push_back({z_lo - 4.0 * step, x + 4.0 * step});
    }
  }
  if (in_zero) covers.push_back({z_lo - 4.0 * step, up});

  CkFunction f = f0;
  for (const Interval& c : covers) {
    for (double e : t.spectrum())
      if (c.contains(e))
        fail(errc::value_attained, "zero cover touches the spectrum; phi(x)=pi_C on sigma(H)?");
    f = rejoin_avoiding(f, c, cplx(0.0));
  }

  // g = -chi / f with chi = 1 on [lp, up]; the chi plateau keeps the division
  // inside the region where f was just cleared of zeros
  double margin = eps / 2.0;
  CkFunction chi = approx_char(lp, up, margin);
  auto fn = [chi, f](double x, int m) -> Jet {
    Jet c = chi.jet(x, m);
    if (c.is_zero()) return c;
    return -c / f.jet(x, m);
  };
  return CkFunction(fn, std::min(chi.max_order(), f.max_order()), -1.0,
                    Interval{lp - margin, up + margin});
}

}  // namespace hscalc
