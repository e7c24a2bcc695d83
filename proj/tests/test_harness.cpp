#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "morley/harness.hpp"

using namespace morley;

TEST_CASE("fitted_order recovers exact power laws") {
  const std::vector<double> hs = {0.4, 0.2, 0.1, 0.05};
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    std::vector<double> errs;
    for (double h : hs) errs.push_back(7.3 * std::pow(h, p));
    REQUIRE(fitted_order(hs, errs) == Catch::Approx(p).margin(1e-10));
  }
  REQUIRE_THROWS_AS(fitted_order({0.1}, {1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(fitted_order({0.1, 0.05}, {1.0}), std::invalid_argument);
}

TEST_CASE("report column lookup") {
  ConvergenceReport rep;
  rep.columns = {"a", "b"};
  rep.scales = {0.2, 0.1};
  rep.rows = {{0.4, 0.1}, {0.2, 0.025}};
  rep.fit();
  REQUIRE(rep.order("a") == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(rep.order("b") == Catch::Approx(2.0).margin(1e-12));
  REQUIRE_THROWS_AS(rep.order("c"), std::invalid_argument);
}

TEST_CASE("interpolation error rates for a smooth field") {
  const auto rep = interpolation_study(sin_pix_cos_piy(), {8, 16, 32});
  REQUIRE(rep.scales == std::vector<double>{0.25, 0.125, 0.0625});
  REQUIRE(rep.columns == std::vector<std::string>{"l2", "h1", "h2"});
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c)
      REQUIRE(rep.rows[i][c] < rep.rows[i - 1][c]);
  REQUIRE(rep.order("l2") == Catch::Approx(3.0).margin(0.2));
  REQUIRE(rep.order("h1") == Catch::Approx(2.0).margin(0.2));
  REQUIRE(rep.order("h2") == Catch::Approx(1.0).margin(0.2));
}

TEST_CASE("enrichment error rates") {
  const auto rep = enrichment_study(sin_pix_cos_piy(), {8, 16, 32});
  REQUIRE(rep.columns == std::vector<std::string>{"l2", "h1"});
  REQUIRE(rep.order("l2") >= 1.8);
  REQUIRE(rep.order("h1") >= 0.9);
}

TEST_CASE("elliptic projection error rates") {
  const auto rep = projection_study(cos_pix_piy(), 0.5, {8, 16, 32});
  REQUIRE(rep.columns == std::vector<std::string>{"l2", "h2"});
  REQUIRE(rep.order("l2") >= 1.8);
  REQUIRE(rep.order("h2") >= 0.9);
}

TEST_CASE("manufactured run reproduces a steady state exactly") {
  // u* = 1 is a well bottom: zero source, zero discrete residual.  Every
  // error column of the study must sit at roundoff.
  ManufacturedProblem steady{[](double) { return constant_function(1.0); },
                             [](double, const Vec2&) { return 0.0; }};
  const auto rep = space_convergence(steady, 0.5, {2, 4}, 1e-3, 2e-3, 1);
  for (const auto& row : rep.rows)
    for (double e : row) REQUIRE(e <= 1e-12);
}

TEST_CASE("space refinement rates for the decaying manufactured state") {
  const auto rep =
      space_convergence(manufactured_problem(0.5), 0.5, {8, 16}, 1e-5, 5e-4);
  REQUIRE(rep.columns ==
          std::vector<std::string>{"hm1_theta", "l2_theta", "h2_theta",
                                   "l2_exact", "h2_exact"});
  // theta compares two discrete fields and superconverges; the exact-error
  // columns carry the interpolation-theory rates.
  REQUIRE(rep.order("hm1_theta") >= 1.8);
  REQUIRE(rep.order("l2_theta") >= 1.8);
  REQUIRE(rep.order("h2_theta") >= 1.8);
  REQUIRE(rep.order("l2_exact") == Catch::Approx(2.0).margin(0.2));
  REQUIRE(rep.order("h2_exact") == Catch::Approx(1.0).margin(0.2));
}

TEST_CASE("time refinement rates against a same-mesh reference") {
  const auto rep = time_convergence(manufactured_problem(0.5), 0.5, 8,
                                    {4e-3, 2e-3}, 0.016, 1);
  REQUIRE(rep.scales == std::vector<double>{4e-3, 2e-3});
  REQUIRE(rep.columns == std::vector<std::string>{"hm1_self", "l2_self",
                                                  "hm1_theta", "l2_theta"});
  // Same-mesh differencing cancels the spatial error, exposing the first
  // order time rate; against the projected exact state the spatial part
  // dominates at this resolution and the order saturates to zero.
  REQUIRE(rep.order("hm1_self") >= 0.9);
  REQUIRE(rep.order("hm1_self") <= 1.8);
  REQUIRE(rep.order("l2_self") >= 0.9);
  REQUIRE(std::abs(rep.order("hm1_theta")) <= 0.3);
  for (const auto& row : rep.rows)
    for (double e : row) REQUIRE(e > 0.0);
}

TEST_CASE("zero level set of a one-signed field is empty") {
  const Mesh mesh = Mesh::crisscross(4);
  const Eigen::VectorXd u = interpolate(mesh, constant_function(1.0));
  REQUIRE(extract_zero_level_set(mesh, u).polylines.empty());
}

TEST_CASE("zero level set through mesh vertices") {
  // I_h(x) vanishes on the whole line x = 0, which is a mesh line: the
  // extractor must chain the vertex hits into one open polyline and must
  // not duplicate it from the uniformly positive side.
  const Mesh mesh = Mesh::crisscross(4);
  ScalarFunction f;
  f.value = [](Vec2 p) { return p.x(); };
  f.grad = [](Vec2) { return Vec2(1.0, 0.0); };
  const Eigen::VectorXd u = interpolate(mesh, f);

  const ContourSet cs = extract_zero_level_set(mesh, u);
  REQUIRE(cs.polylines.size() == 1);
  const auto& line = cs.polylines[0];
  REQUIRE(line.size() == 5);
  for (const Vec2& p : line) REQUIRE(std::abs(p.x()) <= 1e-15);
  std::vector<double> ys;
  for (const Vec2& p : line) ys.push_back(p.y());
  if (ys.front() > ys.back()) std::reverse(ys.begin(), ys.end());
  REQUIRE(ys == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
}

TEST_CASE("zero level set of a circular interface") {
  const double eps = 0.05;
  const int n = 50;
  const Mesh mesh = Mesh::crisscross(n);
  const Eigen::VectorXd u = interpolate(mesh, circle_tanh(eps));

  const ContourSet cs = extract_zero_level_set(mesh, u);
  REQUIRE(cs.polylines.size() == 1);
  const auto& loop = cs.polylines[0];
  REQUIRE(loop.size() >= 8);
  REQUIRE((loop.front() - loop.back()).norm() == 0.0);  // closed
  const double h = mesh.grid_h();
  for (const Vec2& p : loop) {
    REQUIRE(p.norm() >= 0.5 - 2 * h);
    REQUIRE(p.norm() <= 0.5 + 2 * h);
  }
}

TEST_CASE("zero level set separates two interfaces") {
  const Mesh mesh = Mesh::crisscross(80);
  const Eigen::VectorXd u = interpolate(mesh, two_circles_tanh(0.04));

  const ContourSet cs = extract_zero_level_set(mesh, u);
  REQUIRE(cs.polylines.size() == 2);
  for (const auto& loop : cs.polylines) {
    REQUIRE((loop.front() - loop.back()).norm() == 0.0);
    double cx = 0;
    for (std::size_t i = 0; i + 1 < loop.size(); ++i) cx += loop[i].x();
    cx /= static_cast<double>(loop.size() - 1);
    REQUIRE(std::abs(std::abs(cx) - 0.3) <= 0.05);  // centered at x = +-0.3
  }
}
