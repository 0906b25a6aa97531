#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mbc/piecewise_poly.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace mbc;

namespace {

// Midpoint rule oracle on one smooth stretch; independent of the antiderivative path.
double midpoint_integral(const std::function<double(double)>& f, double a, double b, std::size_t m) {
  const double dx = (b - a) / static_cast<double>(m);
  double s = 0.0;
  for (std::size_t k = 0; k < m; ++k) s += f(a + (static_cast<double>(k) + 0.5) * dx);
  return s * dx;
}

PiecewisePolynomial sample_pp() {
  // x^2 on [0,1/3), 1 - x on [1/3, 1]
  return {{rational(0), rational(1, 3), rational(1)},
          {{rational(0), rational(0), rational(1)}, {rational(1), rational(-1)}}};
}

}  // namespace

TEST_CASE("rationals are canonical") {
  CHECK(rational("2/4") == rational(1, 2));
  CHECK(rational("-6/4").get_den() == 2);
  CHECK(rational("-6/4").get_num() == -3);
  CHECK(rational(3, -6) == rational(-1, 2));
  CHECK(rational("7") == 7);
  CHECK_THROWS_AS(rational(1, 0), std::invalid_argument);
  CHECK(to_double(rational(1, 3)) == 1.0 / 3.0);
  CHECK(to_double(rational("177147/2")) == 88573.5);
}

TEST_CASE("construction is validated") {
  CHECK_THROWS_AS(PiecewisePolynomial({rational(0), rational(1, 2)}, {{rational(1)}}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewisePolynomial({rational(0), rational(1, 2), rational(1, 2), rational(1)},
                                      {{rational(1)}, {rational(1)}, {rational(1)}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PiecewisePolynomial({rational(0), rational(1)}, {}), std::invalid_argument);
  const PiecewisePolynomial zero;
  CHECK(zero.eval(0.3) == 0.0);
  CHECK(zero.piece_count() == 1);
}

TEST_CASE("evaluation and location") {
  const auto pp = sample_pp();
  CHECK(pp.locate(0.0) == 0);
  CHECK(pp.locate(1.0 / 3.0 + 1e-15) == 1);
  CHECK(pp.locate(1.0) == 1);
  CHECK_THROWS_AS(pp.locate(-1e-9), std::domain_error);
  CHECK_THROWS_AS(pp.eval(1.5), std::domain_error);
  CHECK(pp.eval(0.25) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(pp.eval(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pp.eval_exact(rational(1, 3)) == rational(2, 3));
  CHECK(pp.eval_exact(rational(1, 4)) == rational(1, 16));
  CHECK(pp.degree() == 2);
  CHECK(pp.piece_degree(1) == 1);
}

TEST_CASE("high-degree pieces evaluate without cancellation") {
  // (x - 5/9)^5 expanded around 0 has large cancelling coefficients near x = 5/9.
  const Rational a = rational(5, 9);
  PiecewisePolynomial::Coefficients c(6);
  const long binom[] = {1, 5, 10, 10, 5, 1};
  Rational minus_a_pow = 1;
  for (int k = 5; k >= 0; --k) {
    c[k] = binom[k] * minus_a_pow;
    minus_a_pow *= -a;
  }
  const PiecewisePolynomial pp({rational(0), a, rational(1)}, {c, c});
  for (double d : {1e-3, 1e-4, 1e-5}) {
    const double x = to_double(a) + d;
    CHECK(pp.eval(x) == doctest::Approx(std::pow(x - to_double(a), 5)).epsilon(1e-6));
  }
}

TEST_CASE("arithmetic merges breakpoints") {
  const auto a = sample_pp();
  const auto b = PiecewisePolynomial({rational(0), rational(1, 2), rational(1)}, {{rational(1)}, {rational(2)}});
  const auto s = a + b;
  CHECK(s.piece_count() == 3);
  CHECK(s.eval_exact(rational(1, 4)) == rational(17, 16));
  CHECK(s.eval_exact(rational(3, 4)) == rational(9, 4));
  CHECK((s - b) == a.refined(s.breakpoints()));
  CHECK((rational(2) * a).eval_exact(rational(1, 2)) == 1);
  CHECK_THROWS_AS(a.refined({rational(0), rational(1, 2), rational(1)}), std::invalid_argument);
}

TEST_CASE("calculus round trip") {
  const auto pp = sample_pp();
  const auto F = antiderivative(pp, rational(3));
  CHECK(F.eval_exact(0) == 3);
  CHECK(differentiate(F) == pp);
  // Continuity of the antiderivative across the breakpoint.
  CHECK(F.eval_piece_exact(0, rational(1, 3)) == F.eval_piece_exact(1, rational(1, 3)));
  CHECK(integrate_exact(pp, 0, 1) == rational(1, 81) + rational(2, 9));
  CHECK_THROWS_AS(integrate(pp, 0.6, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(integrate(pp, -0.1, 0.5), std::domain_error);
}

TEST_CASE("integration against a midpoint-rule oracle") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> coef(-50, 50);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Rational> bps{rational(0), rational(2, 7), rational(3, 5), rational(1)};
    std::vector<PiecewisePolynomial::Coefficients> pieces;
    for (int j = 0; j < 3; ++j) {
      PiecewisePolynomial::Coefficients c;
      for (int k = 0; k <= 5; ++k) c.push_back(rational(coef(rng), 1 + trial));
      pieces.push_back(c);
    }
    const PiecewisePolynomial pp(bps, pieces);
    double oracle = 0.0;
    const double cuts[] = {0.1, 2.0 / 7.0, 0.6, 0.9};
    for (int j = 0; j < 3; ++j)
      oracle += midpoint_integral([&](double x) { return pp.eval_piece(static_cast<std::size_t>(j), x); }, cuts[j],
                                  cuts[j + 1], 1000000);
    CHECK(integrate(pp, 0.1, 0.9) == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("level sets") {
  const auto pp = sample_pp();
  auto pts = level_set_points(pp, 0.05, 1e-12);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].x == doctest::Approx(std::sqrt(0.05)).epsilon(1e-14));
  CHECK(pts[1].x == doctest::Approx(0.95).epsilon(1e-14));
  // x^2 never reaches 0.25 on its piece.
  pts = level_set_points(pp, 0.25, 1e-12);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].x == doctest::Approx(0.75).epsilon(1e-14));

  // Tangency: x^2 - x + 1/4 touches 0 at 1/2.
  const auto tangent = PiecewisePolynomial::polynomial({rational(1, 4), rational(-1), rational(1)});
  pts = level_set_points(tangent, 0.0, 1e-12);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(pts[0].interval_bound);

  // Constant piece equal to the level reports its interval.
  const PiecewisePolynomial plateau({rational(0), rational(1, 4), rational(1, 2), rational(1)},
                                    {{rational(0), rational(4)}, {rational(1)}, {rational(3), rational(-4)}});
  pts = level_set_points(plateau, 1.0, 1e-12);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].x == doctest::Approx(0.25));
  CHECK(pts[1].x == doctest::Approx(0.5));
  CHECK(pts[0].interval_bound);

  CHECK(level_set_points(pp, 5.0, 1e-12).empty());
  CHECK_THROWS_AS(level_set_points(pp, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("bracket_roots finds sign changes") {
  const auto roots = detail::bracket_roots([](double x) { return std::sin(10 * x); }, 0.1, 1.0, 64);
  REQUIRE(roots.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(roots[k] == doctest::Approx((k + 1) * M_PI / 10).epsilon(1e-14));
}
