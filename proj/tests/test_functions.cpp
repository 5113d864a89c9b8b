#include "doctest.h"
#include "hscalc/function_ops.hpp"
#include "hscalc/functions.hpp"

#include <cmath>
#include <random>

#include "support/oracles.hpp"

using namespace hscalc;

TEST_CASE("japanese bracket") {
  CHECK(japanese_bracket(0.0) == 1.0);
  CHECK(japanese_bracket(std::sqrt(3.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(japanese_bracket(cplx(3.0, 4.0)) == doctest::Approx(std::sqrt(26.0)).epsilon(1e-15));
}

TEST_CASE("smooth step plateaus and midpoint") {
  for (GlueKind g : {GlueKind::exponential, GlueKind::tanh_rational}) {
    CkFunction psi = smooth_step(0.0, 1.0, g);
    CHECK(psi.value(0.5).real() == 1.0);
    CHECK(psi.value(-2.0).real() == 0.0);
    CHECK(psi.value(-0.5).real() == doctest::Approx(0.5).epsilon(1e-13));
    double v = psi.value(-0.25).real();
    CHECK(v > 0.5);
    CHECK(v < 1.0);
    // all derivatives vanish on the plateaus
    CHECK(std::abs(psi.derivative(3, 0.1)) == 0.0);
    CHECK(std::abs(psi.derivative(3, -1.1)) == 0.0);
  }
  CHECK_THROWS_AS(smooth_step(0.0, 0.0), error);
}

TEST_CASE("approximate characteristic function") {
  CkFunction chi = approx_char(0.0, 1.0, 0.1);
  CHECK(chi.value(0.5).real() == 1.0);
  CHECK(chi.value(2.0).real() == 0.0);
  CkFunction psi = smooth_step(0.0, 0.1);
  CHECK(chi.value(-0.05).real() == doctest::Approx(psi.value(-0.05).real()).epsilon(1e-14));
  CHECK(chi.value(-0.05).real() > 0.0);
  CHECK(chi.value(-0.05).real() < 1.0);
  REQUIRE(chi.support());
  CHECK(chi.support()->lo == doctest::Approx(-0.1));
  CHECK(chi.support()->hi == doctest::Approx(1.1));
  CHECK_THROWS_AS(approx_char(1.0, 0.0, 0.1), error);
  CHECK_THROWS_AS(approx_char(0.0, 1.0, -1.0), error);
}

TEST_CASE("finite-difference consistency of supplied derivatives") {
  // the declared first derivative must match the central difference
  auto check_fd = [](const CkFunction& f, double x) {
    auto val = [&f](double t) { return f.value(t); };
    cplx fd = oracles::central_diff(val, x, 1e-6);
    CHECK(std::abs(fd - f.derivative(1, x)) < 1e-7 * std::max(1.0, std::abs(fd)));
  };
  check_fd(bracket_power(-1.0), 0.8);
  check_fd(inverse_linear(cplx(0.0, 1.0)), -1.3);
  check_fd(bump(-1.0, 3.0), 0.4);
  check_fd(approx_char(-1.0, 3.0, 0.25), -1.05);
  check_fd(smooth_step(0.0, 1.0, GlueKind::tanh_rational), -0.7);
}

TEST_CASE("difference quotient") {
  SUBCASE("polynomial exactness") {
    // f(x) = x^2, s = 0: g_0(x) = x
    CkFunction f = polynomial_function({cplx(0.0), cplx(0.0), cplx(1.0)});
    CkFunction g = difference_quotient(f, 0.0);
    CHECK(std::abs(g.value(2.0) - cplx(2.0)) < 1e-14);
    CHECK(std::abs(g.value(0.0)) < 1e-14);
    CHECK(std::abs(g.derivative(1, 0.01) - cplx(1.0)) < 1e-12);

    // degree 4: f(x) = x^4 - 2x + 1, s = 1.5; quotient is exact
    CkFunction f4 = polynomial_function({cplx(1.0), cplx(-2.0), cplx(0.0), cplx(0.0), cplx(1.0)});
    CkFunction g4 = difference_quotient(f4, 1.5);
    for (double x : {-2.0, 1.49999, 1.5, 1.7, 4.0}) {
      // exact quotient: (f(x)-f(s))/(x-s) via long division
      double s = 1.5;
      double quotient = ((x * x * x) + s * (x * x) + s * s * x + s * s * s) - 2.0;
      CHECK(std::abs(g4.value(x) - cplx(quotient)) < 1e-11 * std::max(1.0, std::abs(quotient)));
    }
  }
  SUBCASE("resolvent kernel arithmetic") {
    CkFunction f = inverse_linear(cplx(0.0, 1.0));
    CkFunction g = difference_quotient(f, 0.0);
    cplx expect = f.value(1.0) - f.value(0.0);  // (f(1)-f(0))/(1-0)
    CHECK(std::abs(g.value(1.0) - expect) < 1e-13);
  }
  SUBCASE("value at s is f'(s)") {
    CkFunction f = bracket_power(-1.0);
    CkFunction g = difference_quotient(f, 0.7);
    CHECK(std::abs(g.value(0.7) - f.derivative(1, 0.7)) < 1e-12);
  }
  SUBCASE("g_s^(m)(s) = f^(m+1)(s)/(m+1)") {
    CkFunction f = bracket_power(-2.0);
    CkFunction g = difference_quotient(f, 0.3);
    for (int m = 1; m <= 3; ++m)
      CHECK(std::abs(g.derivative(m, 0.3) - f.derivative(m + 1, 0.3) / (m + 1.0)) < 1e-10);
  }
  SUBCASE("needs two derivative orders") {
    CkFunction low([](double x, int m) { return Jet::variable(x, m); }, 1, 0.0);
    CHECK_THROWS_AS(difference_quotient(low, 0.0), error);
  }
}

TEST_CASE("gamma join") {
  CHECK(std::abs(gamma_join(cplx(1.0), cplx(0.0, 1.0), 0.0) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(gamma_join(cplx(1.0), cplx(0.0, 1.0), 1.0) - cplx(0.0, 1.0)) < 1e-15);
  cplx mid = gamma_join(cplx(1.0), cplx(0.0, 1.0), 0.5);
  CHECK(std::abs(mid - std::polar(1.0, M_PI / 4.0)) < 1e-15);
  CHECK_THROWS_AS(gamma_join(cplx(0.0), cplx(1.0), 0.5), error);

  // never vanishes: |Gamma| >= min(|z|,|w|) on an alpha-grid, randomized
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    cplx z(u(rng), u(rng)), w(u(rng), u(rng));
    if (std::abs(z) < 0.1 || std::abs(w) < 0.1) continue;
    double lo = std::min(std::abs(z), std::abs(w));
    for (int i = 0; i <= 64; ++i)
      CHECK(std::abs(gamma_join(z, w, i / 64.0)) >= lo - 1e-12);
  }
}

TEST_CASE("rejoin avoiding a value") {
  SUBCASE("f never equal to lambda: returned unchanged") {
    CkFunction f = bracket_power(-1.0);  // range (0,1], avoid 5
    CkFunction h = rejoin_avoiding(f, {-1.0, 1.0}, cplx(5.0));
    CHECK(std::abs(h.value(0.3) - f.value(0.3)) == 0.0);
  }
  SUBCASE("f(x)=x through 0 on [-1,1]") {
    CkFunction f = polynomial_function({cplx(0.0), cplx(1.0)});
    CkFunction h = rejoin_avoiding(f, {-1.0, 1.0}, cplx(0.0));
    CHECK(std::abs(h.value(-1.0) - cplx(-1.0)) < 1e-12);
    CHECK(std::abs(h.value(1.0) - cplx(1.0)) < 1e-12);
    double min_abs = 1e300;
    for (int i = 0; i <= 2000; ++i) {
      double x = -1.0 + 2.0 * i / 2000.0;
      min_abs = std::min(min_abs, std::abs(h.value(x)));
    }
    CHECK(min_abs > 0.0);
    // h - f and its derivatives vanish at the endpoints
    for (int r = 0; r <= 2; ++r) {
      CHECK(std::abs(h.derivative(r, -1.0) - f.derivative(r, -1.0)) < 1e-10);
      CHECK(std::abs(h.derivative(r, 1.0) - f.derivative(r, 1.0)) < 1e-10);
    }
    // f untouched outside the interval
    CHECK(std::abs(h.value(2.5) - f.value(2.5)) == 0.0);
  }
  SUBCASE("endpoint hits lambda") {
    CkFunction f = polynomial_function({cplx(0.0), cplx(1.0)});
    CHECK_THROWS_AS(rejoin_avoiding(f, {0.0, 1.0}, cplx(0.0)), error);
  }
}

TEST_CASE("extended element algebra") {
  CkFunction f = bracket_power(-2.0);
  CkFunction g = inverse_linear(cplx(0.0, 2.0));
  ExtendedElement a{cplx(1.0, 0.5), f}, b{cplx(-2.0), g};
  ExtendedElement prod = a * b;
  for (double x : {-3.0, 0.0, 0.4, 11.0}) {
    cplx expect = a.value(x) * b.value(x);
    CHECK(std::abs(prod.value(x) - expect) < 1e-13 * std::max(1.0, std::abs(expect)));
  }
  ExtendedElement sum = a + b;
  CHECK(std::abs(sum.value(0.3) - (a.value(0.3) + b.value(0.3))) < 1e-14);
}

TEST_CASE("extended inverse") {
  SUBCASE("identity") {
    ExtendedElement one{cplx(1.0), zero_function()};
    ExtendedElement inv = extended_inverse(one, cplx(0.0));
    CHECK(std::abs(inv.scalar - cplx(1.0)) < 1e-15);
    CHECK(std::abs(inv.value(3.0) - cplx(1.0)) < 1e-15);
  }
  SUBCASE("scalar arithmetic") {
    ExtendedElement two{cplx(2.0), zero_function()};
    ExtendedElement inv = extended_inverse(two, cplx(1.0));
    CHECK(std::abs(inv.scalar - cplx(1.0)) < 1e-15);
  }
  SUBCASE("pointwise inverse on a grid") {
    ExtendedElement phi{cplx(1.0), bracket_power(-2.0)};
    ExtendedElement psi = extended_inverse(phi, cplx(0.0));
    CHECK(std::abs(psi.value(0.0) - cplx(0.5)) < 1e-14);  // phi(0) = 2
    for (double x : {-5.0, -0.3, 0.0, 1.7, 40.0})
      CHECK(std::abs(psi.value(x) * phi.value(x) - cplx(1.0)) < 1e-12);
  }
  SUBCASE("guards") {
    ExtendedElement phi{cplx(1.0), bracket_power(-2.0)};
    CHECK_THROWS_AS(extended_inverse(phi, cplx(1.0)), error);  // scalar hit
    CHECK_THROWS_AS(extended_inverse(phi, cplx(1.5)), error);  // value attained (phi range (1,2])
  }
}

TEST_CASE("bracket power derivative envelope on a wide grid") {
  // |d^r/dx^r <x>^{-1}| <= c_r <x>^{-1-r}: fit c_r, then recheck shifted
  CkFunction f = bracket_power(-1.0);
  for (int r = 0; r <= 4; ++r) {
    double c = 0.0;
    for (int i = 0; i <= 400; ++i) {
      double x = -1e4 + 2e4 * i / 400.0;
      c = std::max(c, std::abs(f.derivative(r, x)) * std::pow(japanese_bracket(x), 1.0 + r));
    }
    CHECK(c > 0.0);
    CHECK(std::isfinite(c));
    for (int i = 0; i <= 173; ++i) {
      double x = -9.7e3 + 1.94e4 * i / 173.0;
      CHECK(std::abs(f.derivative(r, x)) <=
            1.0001 * c * std::pow(japanese_bracket(x), -1.0 - r) + 1e-300);
    }
  }
}

TEST_CASE("S0 multiplier stability") {
  // f in S^{-2}, g = x^2 <x>^{-2} in S^0: the product derivatives keep decay
  CkFunction f = bracket_power(-2.0);
  CkFunction g = polynomial_function({cplx(0.0), cplx(0.0), cplx(1.0)}) * bracket_power(-2.0);
  CkFunction fg = f * g;
  CHECK(fg.decay_beta() == doctest::Approx(-2.0));
  for (int r = 0; r <= 3; ++r) {
    double bound = 0.0;
    for (int i = 0; i <= 200; ++i) {
      double x = -100.0 + 200.0 * i / 200.0;
      bound = std::max(bound,
                       std::abs(fg.derivative(r, x)) * std::pow(japanese_bracket(x), r + 1.0));
    }
    CHECK(std::isfinite(bound));
    CHECK(bound < 50.0);
  }
}

TEST_CASE("custom table interpolates and flags itself approximate") {
  std::vector<double> xs;
  std::vector<cplx> ys;
  for (int i = 0; i <= 40; ++i) {
    double x = -4.0 + 8.0 * i / 40.0;
    xs.push_back(x);
    ys.push_back(1.0 / (1.0 + x * x));
  }
  CkFunction f = custom_table(xs, ys);
  CHECK(f.approximate());
  CHECK(f.max_order() == 3);
  CHECK(std::abs(f.value(0.37) - cplx(1.0 / (1.0 + 0.37 * 0.37))) < 5e-4);
  CHECK_THROWS_AS(custom_table({0.0, 1.0}, {cplx(1.0), cplx(1.0)}), error);
}

TEST_CASE("support hint forces exact zeros outside") {
  CkFunction b = bump(-1.0, 3.0);
  CHECK(std::abs(b.value(3.5)) == 0.0);
  CHECK(std::abs(b.derivative(2, -1.0)) == 0.0);
  CHECK(b.value(1.0).real() == doctest::Approx(1.0));  // normalized peak
}

TEST_CASE("order cap is enforced") {
  CkFunction f = bracket_power(-1.0);
  CHECK_THROWS_AS(f.jet(0.0, kAnalyticOrderCap + 1), error);
}
