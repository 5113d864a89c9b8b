#include "doctest.h"
#include "hscalc/hs_calculus.hpp"
#include "hscalc/norms.hpp"
#include "hscalc/operators.hpp"

#include <cmath>

using namespace hscalc;

namespace {

QuadratureSpec quick() {
  QuadratureSpec q;
  q.nx = 32;
  q.ny = 4;
  q.refinement_levels = 2;
  q.target_tol = 1e-3;
  return q;
}

CkFunction one_over_one_plus_x2() { return bracket_power(-2.0); }

}  // namespace

TEST_CASE("hs_apply reproduces the resolvent kernel") {
  ComplexMatrix h(1);  // [[0]]
  CalculusResult r = hs_apply(inverse_linear(cplx(0.0, 1.0)), h, 2, quick());
  CHECK(std::abs(r.value(0, 0) - cplx(0.0, -1.0)) < 5e-3);
  CHECK(r.levels_used >= 2);
  CHECK(r.error_estimate >= 0.0);
}

TEST_CASE("hs_apply matches the diagonal oracle") {
  TestOperator t = make_test_operator({1.0, 2.0}, GivenConditioner{ComplexMatrix::identity(2)});
  QuadratureSpec q;
  q.refinement_levels = 3;
  CalculusResult r = hs_apply(one_over_one_plus_x2(), t.h(), 2, q, t.bound());
  ComplexMatrix oracle = oracle_apply(t, one_over_one_plus_x2());
  CHECK((r.value - oracle).frobenius_norm() / oracle.frobenius_norm() < 2e-4);
}

TEST_CASE("disjoint compact support annihilates") {
  TestOperator t = make_test_operator({0.0, 1.0}, UnitaryConditioner{3});
  CalculusResult r = hs_apply(bump(3.0, 4.0), t.h(), 2, quick(), t.bound());
  CHECK(r.value.frobenius_norm() < 1e-4);
}

TEST_CASE("norm bound against the function norm") {
  TestOperator t = make_test_operator({0.0, 1.0}, UnitaryConditioner{9});
  CkFunction f = one_over_one_plus_x2();
  CalculusResult r = hs_apply(f, t.h(), 2, quick(), t.bound());
  double c = spectral_norm(r.value) / an_norm(f, 3, 1e-6);
  CHECK(std::isfinite(c));
  CHECK(c > 0.0);
}

TEST_CASE("order and spec guards") {
  ComplexMatrix h(1);
  CkFunction f = one_over_one_plus_x2();
  CHECK_THROWS_AS(hs_apply(f, h, 2, quick(), ResolventBound{1.0, 2.5}), error);  // n <= alpha
  CkFunction low = custom_table({-2.0, -1.0, 0.0, 1.0, 2.0},
                                {cplx(0.0), cplx(0.5), cplx(1.0), cplx(0.5), cplx(0.0)});
  CHECK_THROWS_AS(hs_apply(low, h, 3, quick()), error);  // needs order 4 > max_order 3
  QuadratureSpec bad = quick();
  bad.nx = 2;
  CHECK_THROWS_AS(hs_apply(f, h, 2, bad), error);
  QuadratureSpec bad2 = quick();
  bad2.target_tol = 0.0;
  CHECK_THROWS_AS(hs_apply(f, h, 2, bad2), error);
  // a bounded non-decaying function cannot certify its window
  CHECK_THROWS_AS(hs_apply(smooth_step(0.0, 1.0), h, 2, quick()), error);
}

TEST_CASE("n-independence and cutoff-independence") {
  TestOperator t = make_test_operator({0.0, 1.0}, UnitaryConditioner{11});
  QuadratureSpec q;
  q.refinement_levels = 3;
  CkFunction f = one_over_one_plus_x2();
  CalculusResult r2 = hs_apply(f, t.h(), 2, q, t.bound());
  CalculusResult r3 = hs_apply(f, t.h(), 3, q, t.bound());
  CHECK((r2.value - r3.value).frobenius_norm() <= r2.error_estimate + r3.error_estimate);

  CalculusResult rt = hs_apply(f, t.h(), 2, q, t.bound(), GlueKind::tanh_rational);
  CHECK((r2.value - rt.value).frobenius_norm() <= r2.error_estimate + rt.error_estimate);
}

TEST_CASE("homomorphism on a product") {
  TestOperator t = make_test_operator({0.0, 1.0}, UnitaryConditioner{13});
  QuadratureSpec q;
  q.refinement_levels = 3;
  CkFunction f = one_over_one_plus_x2();
  CkFunction g = approx_char(-1.0, 2.0, 0.5);
  CalculusResult rf = hs_apply(f, t.h(), 2, q, t.bound());
  CalculusResult rg = hs_apply(g, t.h(), 2, q, t.bound());
  CalculusResult rfg = hs_apply(f * g, t.h(), 2, q, t.bound());
  double gap = (rfg.value - rf.value * rg.value).frobenius_norm();
  double budget = 5.0 * (rf.error_estimate + rg.error_estimate + rfg.error_estimate) *
                  (1.0 + spectral_norm(rf.value) + spectral_norm(rg.value));
  CHECK(gap <= budget);
}

TEST_CASE("extended calculus") {
  TestOperator t = make_test_operator({0.0, 1.0}, UnitaryConditioner{17});
  SUBCASE("scalar part only gives the identity") {
    ExtendedElement phi{cplx(1.0), zero_function()};
    CalculusResult r = hs_apply_extended(phi, t.h(), 2, quick(), t.bound());
    CHECK((r.value - ComplexMatrix::identity(2)).frobenius_norm() < 1e-12);
  }
  SUBCASE("zero scalar reduces to hs_apply") {
    CkFunction f = one_over_one_plus_x2();
    ExtendedElement phi{cplx(0.0), f};
    CalculusResult a = hs_apply_extended(phi, t.h(), 2, quick(), t.bound());
    CalculusResult b = hs_apply(f, t.h(), 2, quick(), t.bound());
    CHECK((a.value - b.value).frobenius_norm() < 1e-12);  // thread-order rounding only
  }
  SUBCASE("phi vanishing at the spectrum point") {
    ComplexMatrix h(1);  // [[0]]
    ExtendedElement phi{cplx(1.0), cplx(-1.0) * one_over_one_plus_x2()};
    CalculusResult r = hs_apply_extended(phi, h, 2, quick());
    CHECK(std::abs(r.value(0, 0)) < 1e-2);  // phi(0) = 1 - 1 = 0 (coarse smoke quad)
  }
  SUBCASE("norm inequality") {
    CkFunction f = one_over_one_plus_x2();
    ExtendedElement phi{cplx(0.5, -0.25), f};
    CalculusResult whole = hs_apply_extended(phi, t.h(), 2, quick(), t.bound());
    CalculusResult part = hs_apply(f, t.h(), 2, quick(), t.bound());
    CHECK(spectral_norm(whole.value) <=
          std::abs(phi.scalar) + spectral_norm(part.value) + 1e-9);
  }
}

TEST_CASE("contour and area routes agree") {
  TestOperator t = make_test_operator({1.0, 2.0}, UnitaryConditioner{23});
  QuadratureSpec q;
  q.refinement_levels = 3;
  CkFunction f = one_over_one_plus_x2();
  CalculusResult area = hs_apply(f, t.h(), 2, q, t.bound());
  CalculusResult ring = hs_contour_apply(f, t.h(), 0.5, q, t.enclosure(), 2, t.bound());
  CHECK((area.value - ring.value).frobenius_norm() <=
        area.error_estimate + ring.error_estimate + 1e-6);
  ComplexMatrix oracle = oracle_apply(t, f);
  CHECK((ring.value - oracle).frobenius_norm() < 1e-4);
}

TEST_CASE("contour route renders an enclosing plateau as the identity") {
  TestOperator t = make_test_operator({1.0, 2.0}, UnitaryConditioner{37});
  QuadratureSpec q;
  q.refinement_levels = 3;
  CkFunction chi = approx_char(0.0, 3.0, 0.25);
  CalculusResult r = hs_contour_apply(chi, t.h(), 0.5, q, t.enclosure(), 2, t.bound());
  CHECK((r.value - ComplexMatrix::identity(2)).frobenius_norm() < 5e-4);
}

TEST_CASE("contour guards") {
  ComplexMatrix b(1);
  CkFunction f = one_over_one_plus_x2();
  CHECK_THROWS_AS(hs_contour_apply(f, b, -0.5, quick(), Interval{-1.0, 1.0}), error);
  CHECK_THROWS_AS(hs_contour_apply(f, b, 0.5, quick(), std::nullopt), error);
}

TEST_CASE("characteristic function of an enclosing interval is the identity") {
  ComplexMatrix b1(1);  // [[0]]
  QuadratureSpec q;
  q.refinement_levels = 3;
  double dev = char_one_check(b1, -1.0, 1.0, 0.25, q, Interval{0.0, 0.0});
  CHECK(dev < 2e-4);

  TestOperator t = make_test_operator({1.0, 2.0}, UnitaryConditioner{29});
  double dev2 = char_one_check(t.h(), 0.0, 3.0, 0.25, q, t.enclosure(), t.bound());
  CHECK(dev2 < 3e-4);

  CHECK_THROWS_AS(char_one_check(t.h(), 1.5, 3.0, 0.25, q, t.enclosure(), t.bound()), error);
}

TEST_CASE("semibounded calculus through the extension") {
  TestOperator t = make_test_operator({0.0, 1.0}, GivenConditioner{ComplexMatrix::identity(2)});
  QuadratureSpec q;
  q.refinement_levels = 3;
  SUBCASE("exponential decay") {
    CalculusResult r = semibounded_apply(exp_decay_half_line(1.0), t.h(), seeley_coefficients(5),
                                         2, q, t.enclosure(), t.bound());
    ComplexMatrix oracle = t.apply_pointwise([](double x) { return std::exp(-x); });
    CHECK((r.value - oracle).frobenius_norm() < 1e-3);
  }
  SUBCASE("scalar shift inverse") {
    TestOperator s = make_test_operator({2.0}, GivenConditioner{ComplexMatrix::identity(1)});
    CalculusResult r = semibounded_apply(inverse_shift_half_line(1.0), s.h(),
                                         seeley_coefficients(5), 2, q, s.enclosure(), s.bound());
    CHECK(std::abs(r.value(0, 0) - cplx(1.0 / 3.0)) < 1e-3);
  }
  SUBCASE("spectrum must sit in the half line") {
    TestOperator neg = make_test_operator({-1.0, 1.0}, UnitaryConditioner{5});
    CHECK_THROWS_AS(semibounded_apply(exp_decay_half_line(1.0), neg.h(), seeley_coefficients(4),
                                      2, q, neg.enclosure(), neg.bound()),
                    error);
  }
}

TEST_CASE("heat semigroup") {
  QuadratureSpec q;
  q.refinement_levels = 3;
  SUBCASE("zero operator gives the identity") {
    ComplexMatrix h(1);
    CalculusResult r = heat_semigroup(h, 1, 0.7, q, Interval{0.0, 0.0});
    CHECK(std::abs(r.value(0, 0) - cplx(1.0)) < 1e-3);
  }
  SUBCASE("diagonal oracle for power 1") {
    TestOperator t = make_test_operator({0.0, 1.0}, GivenConditioner{ComplexMatrix::identity(2)});
    CalculusResult r = heat_semigroup(t.h(), 1, 0.5, q, t.enclosure(), t.bound());
    ComplexMatrix oracle = t.apply_pointwise([](double x) { return std::exp(-0.5 * x); });
    CHECK((r.value - oracle).frobenius_norm() < 1e-3);
  }
  SUBCASE("range guards") {
    ComplexMatrix h(1);
    CHECK_THROWS_AS(heat_semigroup(h, 1, 0.0, q, Interval{0.0, 0.0}), error);
    CHECK_THROWS_AS(heat_semigroup(h, 1, 1.5, q, Interval{0.0, 0.0}), error);
    CHECK_THROWS_AS(heat_semigroup(h, 0, 0.5, q, Interval{0.0, 0.0}), error);
  }
}

TEST_CASE("thread count does not change results beyond rounding") {
  TestOperator t = make_test_operator({0.0, 1.0, 2.0}, UnitaryConditioner{31});
  CkFunction f = one_over_one_plus_x2();
  int saved = hs_thread_count();
  hs_thread_count() = 1;
  CalculusResult serial = hs_apply(f, t.h(), 2, quick(), t.bound());
  hs_thread_count() = 4;
  CalculusResult parallel = hs_apply(f, t.h(), 2, quick(), t.bound());
  hs_thread_count() = saved;
  CHECK((serial.value - parallel.value).frobenius_norm() < 1e-11);
}

TEST_CASE("summary line format") {
  ComplexMatrix h(1);
  CalculusResult r = hs_apply(inverse_linear(cplx(0.0, 1.0)), h, 2, quick());
  std::string s = r.summary();
  CHECK(s.find("levels=") == 0);
  CHECK(s.find("est=") != std::string::npos);
  CHECK(s.find("n=2") != std::string::npos);
  CHECK(s.find("cells=") != std::string::npos);
}

TEST_CASE("explicit x-window override is honoured") {
  ComplexMatrix h(1);
  QuadratureSpec q = quick();
  q.x_window = Interval{-20.0, 20.0};
  CalculusResult r = hs_apply(inverse_linear(cplx(0.0, 1.0)), h, 2, q);
  CHECK(std::abs(r.value(0, 0) - cplx(0.0, -1.0)) < 5e-2);
}
