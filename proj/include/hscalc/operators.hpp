#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hscalc/functions.hpp"
#include "hscalc/matrix.hpp"

namespace hscalc {

struct UnitaryConditioner {
  unsigned long seed = 1;
};
struct JordanLikeConditioner {
  double delta = 0.1;
  unsigned long seed = 1;
};
struct GivenConditioner {
  ComplexMatrix p;
};
using ConditionerSpec = std::variant<UnitaryConditioner, JordanLikeConditioner, GivenConditioner>;

/// Valid growth envelope for ||(z-H)^{-1}||:  c |Im z|^{-1} (<z>/|Im z|)^alpha.
struct ResolventBound {
  double c = 1.0;
  double alpha = 0.0;
  double evaluate(cplx z) const {
    const double ay = std::abs(z.imag());
    return c / ay * std::pow(japanese_bracket(z) / ay, alpha);
  }
};

/// H = P diag(eigs) P^{-1} with the spectrum known by construction; the exact
/// functional calculus P f(D) P^{-1} is the oracle every quadrature result is
/// judged against.
class TestOperator {
 public:
  TestOperator(std::vector<double> eigs, const ConditionerSpec& spec) : eigs_(std::move(eigs)) {
    if (eigs_.empty()) fail(errc::bad_config, "test operator needs at least one eigenvalue");
    for (double e : eigs_)
      if (!std::isfinite(e)) fail(errc::bad_config, "eigenvalues must be finite");
    const int d = static_cast<int>(eigs_.size());

    if (std::holds_alternative<UnitaryConditioner>(spec)) {
      p_ = random_unitary(d, std::get<UnitaryConditioner>(spec).seed);
      p_inv_ = p_.conjugate_transpose();
      normal_ = true;
    } else if (std::holds_alternative<JordanLikeConditioner>(spec)) {
      const auto& js = std::get<JordanLikeConditioner>(spec);
      if (!(js.delta > 0.0) || js.delta > 1.0)
        fail(errc::singular_conditioner, "jordan_like delta must be in (0,1]");
      ComplexMatrix q1 = random_unitary(d, js.seed);
      ComplexMatrix q2 = random_unitary(d, js.seed + 7919);
      std::vector<cplx> s(static_cast<std::size_t>(d)), sinv(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) {
        double t = (d == 1) ? 0.0 : static_cast<double>(i) / (d - 1);
        s[i] = std::pow(js.delta, t);  // singular values 1 .. delta
        sinv[i] = 1.0 / s[i];
      }
      p_ = q1 * ComplexMatrix::diagonal(s) * q2.conjugate_transpose();
      p_inv_ = q2 * ComplexMatrix::diagonal(sinv) * q1.conjugate_transpose();
    } else {
      p_ = std::get<GivenConditioner>(spec).p;
      if (p_.dim() != d) fail(errc::bad_config, "conditioner dimension mismatch");
      try {
        p_inv_ = inverse(p_);
      } catch (const error&) {
        fail(errc::singular_conditioner, "conditioner is numerically singular");
      }
    }

    const int dd = d;
    ComplexMatrix residual = p_ * p_inv_ - ComplexMatrix::identity(dd);
    if (residual.frobenius_norm() > 1e-12 * dd)
      fail(errc::singular_conditioner, "||P P^{-1} - I||_F exceeds 1e-12 * d");

    std::vector<cplx> diag(eigs_.begin(), eigs_.end());
    h_ = p_ * ComplexMatrix::diagonal(diag) * p_inv_;
    kappa_ = spectral_norm(p_) * spectral_norm(p_inv_);
  }

  const ComplexMatrix& h() const { return h_; }
  const ComplexMatrix& p() const { return p_; }
  const ComplexMatrix& p_inv() const { return p_inv_; }
  const std::vector<double>& spectrum() const { return eigs_; }
  double kappa() const { return kappa_; }
  int dim() const { return h_.dim(); }
  bool normal() const { return normal_; }

  Interval enclosure() const {
    double lo = eigs_[0], hi = eigs_[0];
    for (double e : eigs_) {
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    return {lo, hi};
  }

  /// Certified envelope: diagonalizable H gives ||R(z)|| <= kappa(P)/|Im z|.
  ResolventBound bound() const { return {normal_ ? 1.0 : kappa_, 0.0}; }

  ComplexMatrix apply_pointwise(const std::function<cplx(double)>& f) const {
    std::vector<cplx> d(eigs_.size());
    for (std::size_t i = 0; i < eigs_.size(); ++i) d[i] = f(eigs_[i]);
    return p_ * ComplexMatrix::diagonal(d) * p_inv_;
  }

 private:
  std::vector<double> eigs_;
  ComplexMatrix p_, p_inv_, h_;
  double kappa_ = 1.0;
  bool normal_ = false;
};

inline TestOperator make_test_operator(std::vector<double> eigs, const ConditionerSpec& spec) {
  return TestOperator(std::move(eigs), spec);
}

/// Ground truth f(H) = P f(D) P^{-1}.
inline ComplexMatrix oracle_apply(const TestOperator& t, const CkFunction& f) {
  return t.apply_pointwise([&f](double x) { return f.value(x); });
}

inline ComplexMatrix oracle_apply(const TestOperator& t, const ExtendedElement& phi) {
  return t.apply_pointwise([&phi](double x) { return phi.value(x); });
}

struct ResolventGridSpec {
  double re_lo = -10.0;
  double re_hi = 10.0;
  int n_re = 21;
  double im_lo = 1e-3;
  double im_hi = 1e2;
  int n_im = 13;  // per sign, log-spaced
};

struct ResolventBoundFit {
  double c = 1.0;
  double alpha = 0.0;
  std::vector<std::pair<cplx, double>> samples;  // (z, ||R(z)||_2)
  double max_log_residual = 0.0;                 // sup of log(norm / bound) <= 0 on the grid

  ResolventBound bound() const { return {c, alpha}; }
};

/// Fits the smallest growth exponent alpha (least squares, clamped >= 0) and
/// then the smallest constant c so the envelope dominates every grid sample.
inline ResolventBoundFit fit_resolvent_bound(const ComplexMatrix& h,
                                             const ResolventGridSpec& grid = {}) {
  if (!(grid.im_lo > 0.0)) fail(errc::grid_touches_axis, "grid |Im z| must start above 0");
  ResolventBoundFit fit;
  std::vector<double> ls, ms;
  for (int sign = -1; sign <= 1; sign += 2)
    for (int i = 0; i < grid.n_im; ++i) {
      double y = grid.im_lo * std::pow(grid.im_hi / grid.im_lo,
                                       grid.n_im == 1 ? 0.0 : double(i) / (grid.n_im - 1));
      for (int j = 0; j < grid.n_re; ++j) {
        double x = grid.re_lo + (grid.re_hi - grid.re_lo) *
                                    (grid.n_re == 1 ? 0.5 : double(j) / (grid.n_re - 1));
        cplx z(x, sign * y);
        double nrm = spectral_norm(resolvent(h, z));
        fit.samples.emplace_back(z, nrm);
        ls.push_back(std::log(nrm * y));
        ms.push_back(std::log(japanese_bracket(z) / y));
      }
    }

  double mbar = 0.0, lbar = 0.0;
  for (std::size_t k = 0; k < ls.size(); ++k) {
    mbar += ms[k];
    lbar += ls[k];
  }
  mbar /= ls.size();
  lbar /= ls.size();
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < ls.size(); ++k) {
    num += (ms[k] - mbar) * (ls[k] - lbar);
    den += (ms[k] - mbar) * (ms[k] - mbar);
  }
  fit.alpha = std::max(0.0, den > 0.0 ? num / den : 0.0);

  double max_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ls.size(); ++k)
    max_gap = std::max(max_gap, ls[k] - fit.alpha * ms[k]);
  fit.c = std::exp(max_gap);

  fit.max_log_residual = 0.0;
  for (std::size_t k = 0; k < ls.size(); ++k)
    fit.max_log_residual =
        std::max(fit.max_log_residual, ls[k] - fit.alpha * ms[k] - std::log(fit.c));
  return fit;
}

}  // namespace hscalc
