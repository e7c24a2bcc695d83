#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "morley/quadrature.hpp"

using namespace morley;

namespace {

// Analytic integral of x^a y^b over the unit right triangle
// {(x,y): x,y >= 0, x+y <= 1}: a! b! / (a+b+2)!.
double monomial_integral(int a, int b) {
  double num = 1.0;
  for (int k = 2; k <= a; ++k) num *= k;
  for (int k = 2; k <= b; ++k) num *= k;
  double den = 1.0;
  for (int k = 2; k <= a + b + 2; ++k) den *= k;
  return num / den;
}

// Apply a rule on the reference triangle (0,0)-(1,0)-(0,1), area 1/2.
double apply_rule(const TriangleRule& rule, int a, int b) {
  double sum = 0.0;
  for (const QuadPoint& q : rule.points) {
    const double x = q.b1;
    const double y = q.b2;
    sum += q.w * std::pow(x, a) * std::pow(y, b);
  }
  return 0.5 * sum;
}

}  // namespace

TEST_CASE("triangle rules are exact through their declared degree") {
  for (int d = 1; d <= 10; ++d) {
    const TriangleRule& rule = triangle_rule(d);
    CAPTURE(d, rule.degree);
    REQUIRE(rule.degree >= d);
    double wsum = 0.0;
    for (const QuadPoint& q : rule.points) {
      CHECK(q.w > 0.0);
      for (double b : {q.b0, q.b1, q.b2}) {
        CHECK(b > 0.0);
        CHECK(b < 1.0);
      }
      CHECK(std::abs(q.b0 + q.b1 + q.b2 - 1.0) < 1e-14);
      wsum += q.w;
    }
    CHECK(std::abs(wsum - 1.0) < 1e-13);
    for (int a = 0; a <= rule.degree; ++a) {
      for (int b = 0; a + b <= rule.degree; ++b) {
        const double exact = monomial_integral(a, b);
        const double quad = apply_rule(rule, a, b);
        CAPTURE(a, b);
        CHECK(std::abs(quad - exact) < 1e-14 * std::max(1.0, std::abs(exact)));
      }
    }
  }
}

TEST_CASE("centroid rule for degree 1") {
  const TriangleRule& rule = triangle_rule(1);
  REQUIRE(rule.points.size() == 1);
  CHECK(rule.points[0].b0 == Catch::Approx(1.0 / 3.0));
  CHECK(rule.points[0].w == Catch::Approx(1.0));
}

TEST_CASE("degree-8 rule integrates x^4 y^4 exactly") {
  const double exact = 576.0 / 3628800.0;  // 4! 4! / 10!
  CHECK(std::abs(apply_rule(triangle_rule(8), 4, 4) - exact) < 1e-15);
}

TEST_CASE("degree-8 rule is not exact at degree 9") {
  // Documents the exactness boundary of the 16-point rule.
  const TriangleRule& rule = triangle_rule(8);
  REQUIRE(rule.degree == 8);
  double worst = 0.0;
  for (int a = 0; a <= 9; ++a) {
    const int b = 9 - a;
    worst = std::max(worst,
                     std::abs(apply_rule(rule, a, b) - monomial_integral(a, b)));
  }
  CHECK(worst > 1e-10);
}

TEST_CASE("unsupported degrees are rejected") {
  CHECK_THROWS_AS(triangle_rule(0), std::invalid_argument);
  CHECK_THROWS_AS(triangle_rule(11), std::invalid_argument);
  CHECK_THROWS_AS(triangle_rule(-2), std::invalid_argument);
}

TEST_CASE("Gauss segment rule nodes and weights") {
  const auto g3 = gauss_segment(3);
  REQUIRE(g3.size() == 3);
  const double s = std::sqrt(0.6);
  CHECK(g3[0].t == Catch::Approx(0.5 * (1.0 - s)).margin(1e-14));
  CHECK(g3[1].t == Catch::Approx(0.5).margin(1e-14));
  CHECK(g3[2].t == Catch::Approx(0.5 * (1.0 + s)).margin(1e-14));
  CHECK(g3[0].w == Catch::Approx(5.0 / 18.0).margin(1e-14));
  CHECK(g3[1].w == Catch::Approx(8.0 / 18.0).margin(1e-14));
  CHECK(g3[2].w == Catch::Approx(5.0 / 18.0).margin(1e-14));
}

TEST_CASE("Gauss segment rules are exact through degree 2n-1") {
  for (int n = 1; n <= 8; ++n) {
    const auto g = gauss_segment(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double sum = 0.0;
      for (const SegPoint& p : g) sum += p.w * std::pow(p.t, k);
      CHECK(std::abs(sum - 1.0 / (k + 1)) < 1e-14);
    }
  }
}

TEST_CASE("barycentric mapping to a physical triangle") {
  const std::array<Vec2, 3> c = {Vec2(0, 0), Vec2(2, 0), Vec2(0, 2)};
  const QuadPoint centroid{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0};
  const Vec2 p = map_to_triangle(c, centroid);
  CHECK((p - Vec2(2.0 / 3.0, 2.0 / 3.0)).norm() < 1e-15);
}
