#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "morley/enrich.hpp"
#include "support.hpp"

using namespace morley;
using test_support::fitted_order;
using test_support::random_vector;

namespace {

ScalarFunction sin_cos() {
  const double pi = M_PI;
  ScalarFunction f;
  f.value = [pi](Vec2 p) { return std::sin(pi * p.x()) * std::cos(pi * p.y()); };
  f.grad = [pi](Vec2 p) {
    return Vec2(pi * std::cos(pi * p.x()) * std::cos(pi * p.y()),
                -pi * std::sin(pi * p.x()) * std::sin(pi * p.y()));
  };
  f.hess = [pi](Vec2 p) {
    const double sx = std::sin(pi * p.x()), cx = std::cos(pi * p.x());
    const double sy = std::sin(pi * p.y()), cy = std::cos(pi * p.y());
    Eigen::Matrix2d h;
    h << -pi * pi * sx * cy, -pi * pi * cx * sy, -pi * pi * cx * sy,
        -pi * pi * sx * cy;
    return h;
  };
  return f;
}

ScalarFunction quadratic(double a0, double ax, double ay, double axx,
                         double axy, double ayy) {
  ScalarFunction f;
  f.value = [=](Vec2 p) {
    return a0 + ax * p.x() + ay * p.y() + axx * p.x() * p.x() +
           axy * p.x() * p.y() + ayy * p.y() * p.y();
  };
  f.grad = [=](Vec2 p) {
    return Vec2(ax + 2 * axx * p.x() + axy * p.y(),
                ay + axy * p.x() + 2 * ayy * p.y());
  };
  f.hess = [=](Vec2) {
    Eigen::Matrix2d h;
    h << 2 * axx, axy, axy, 2 * ayy;
    return h;
  };
  return f;
}

}  // namespace

TEST_CASE("broken norms of reference fields") {
  const Mesh mesh = Mesh::crisscross(4);
  const ScalarFunction one = constant_function(1.0);
  const ScalarFunction fx = quadratic(0, 1, 0, 0, 0, 0);
  const ScalarFunction fx2 = quadratic(0, 0, 0, 1, 0, 0);
  const AnalyticEval e1{&one}, ex{&fx}, ex2{&fx2};

  CHECK(broken_seminorm(mesh, e1, 0) == Catch::Approx(2.0).epsilon(1e-13));
  CHECK(broken_seminorm(mesh, e1, 1) < 1e-13);
  CHECK(broken_seminorm(mesh, ex, 0) ==
        Catch::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(broken_seminorm(mesh, ex, 1) == Catch::Approx(2.0).epsilon(1e-13));
  // |x^2|_{2,2,h} = sqrt(int 4) = 4 on [-1,1]^2.
  CHECK(broken_seminorm(mesh, ex2, 2) == Catch::Approx(4.0).epsilon(1e-13));
  // Full norm stacks the seminorms.
  const double full = broken_norm(mesh, ex, 1);
  CHECK(full == Catch::Approx(std::sqrt(4.0 / 3.0 + 4.0)).epsilon(1e-13));
  CHECK_THROWS_AS(broken_seminorm(mesh, e1, 3), std::invalid_argument);
  CHECK_THROWS_AS(broken_seminorm(mesh, e1, -1), std::invalid_argument);
}

TEST_CASE("broken seminorm is absolutely homogeneous") {
  const Mesh mesh = Mesh::crisscross(3);
  const ElementCache cache(mesh);
  const Eigen::VectorXd u = random_vector(mesh.n_dofs(), 11);
  const Eigen::VectorXd cu = -2.5 * u;
  for (int j = 0; j <= 2; ++j) {
    const double a = broken_seminorm(mesh, MorleyEval{&cache, &u}, j);
    const double b = broken_seminorm(mesh, MorleyEval{&cache, &cu}, j);
    CHECK(b == Catch::Approx(2.5 * a).epsilon(1e-12));
  }
}

TEST_CASE("broken norm satisfies the triangle inequality on samples") {
  const Mesh mesh = Mesh::crisscross(2);
  const ElementCache cache(mesh);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const Eigen::VectorXd u = random_vector(mesh.n_dofs(), 100 + seed);
    const Eigen::VectorXd v = random_vector(mesh.n_dofs(), 200 + seed);
    const Eigen::VectorXd s = u + v;
    for (int j = 0; j <= 2; ++j) {
      const double nu = broken_seminorm(mesh, MorleyEval{&cache, &u}, j);
      const double nv = broken_seminorm(mesh, MorleyEval{&cache, &v}, j);
      const double ns = broken_seminorm(mesh, MorleyEval{&cache, &s}, j);
      CHECK(ns <= nu + nv + 1e-12);
    }
  }
}

TEST_CASE("interpolation reproduces quadratics") {
  const Mesh mesh = Mesh::crisscross(3);
  const ElementCache cache(mesh);
  const ScalarFunction q = quadratic(1.0, -0.5, 2.0, 1.5, 0.5, -1.0);
  const Eigen::VectorXd u = interpolate(mesh, q);
  const auto diff = difference(MorleyEval{&cache, &u}, AnalyticEval{&q});
  CHECK(broken_norm(mesh, diff, 2) < 1e-12);

  const Eigen::VectorXd c = interpolate(mesh, constant_function(3.0));
  CHECK((c.head(mesh.n_vertices()).array() - 3.0).abs().maxCoeff() < 1e-14);
  CHECK(c.tail(mesh.n_edges()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("interpolation requires gradient data") {
  const Mesh mesh = Mesh::crisscross(2);
  ScalarFunction f;
  f.value = [](Vec2 p) { return p.x(); };
  CHECK_THROWS_AS(interpolate(mesh, f), std::invalid_argument);
}

TEST_CASE("interpolation error converges at orders 3, 2, 1") {
  const ScalarFunction v = sin_cos();
  std::vector<double> hs;
  std::vector<double> errs[3];
  for (int n : {8, 16, 32}) {
    const Mesh mesh = Mesh::crisscross(n);
    const ElementCache cache(mesh);
    const Eigen::VectorXd u = interpolate(mesh, v);
    const auto diff = difference(MorleyEval{&cache, &u}, AnalyticEval{&v});
    hs.push_back(mesh.grid_h());
    for (int j = 0; j <= 2; ++j)
      errs[j].push_back(broken_seminorm(mesh, diff, j));
  }
  const double expected[3] = {3.0, 2.0, 1.0};
  for (int j = 0; j <= 2; ++j) {
    const double order = fitted_order(hs, errs[j]);
    CAPTURE(j, errs[j][0], errs[j][1], errs[j][2]);
    CHECK(order == Catch::Approx(expected[j]).margin(0.2));
  }
}

TEST_CASE("HCT element reproduces cubics") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const ElementGeometry g =
      standalone_geometry({Vec2(0.1, 0.0), Vec2(1.2, 0.3), Vec2(0.4, 1.1)});
  const HctElement el = build_hct(g);

  for (int trial = 0; trial < 5; ++trial) {
    Eigen::Matrix<double, 10, 1> c;
    for (int i = 0; i < 10; ++i) c[i] = coef(rng);
    auto val = [&](Vec2 p) {
      return c.dot(morley::detail::cubic_monomials(p));
    };
    auto grad = [&](Vec2 p) {
      return Vec2(c.dot(morley::detail::cubic_dx(p)),
                  c.dot(morley::detail::cubic_dy(p)));
    };
    Vector12d dofs;
    for (int j = 0; j < 3; ++j) {
      dofs[3 * j] = val(g.corners[j]);
      dofs[3 * j + 1] = grad(g.corners[j]).x();
      dofs[3 * j + 2] = grad(g.corners[j]).y();
    }
    for (int i = 0; i < 3; ++i)
      dofs[9 + i] = grad(g.edge_midpoints[i]).dot(g.edge_normals[i]);

    const auto combined = el.combine(dofs);
    std::uniform_real_distribution<double> bc(0.05, 0.9);
    for (int k = 0; k < 30; ++k) {
      double l0 = bc(rng), l1 = bc(rng) * (1.0 - l0);
      const Vec2 p = l0 * g.corners[0] + l1 * g.corners[1] +
                     (1.0 - l0 - l1) * g.corners[2];
      const int sub = el.find_subtri(p);
      CHECK(std::abs(el.value_local(combined[sub], el.local(p)) - val(p)) <
            1e-9);
      CHECK((el.grad_local(combined[sub], el.local(p)) - grad(p)).norm() <
            1e-9);
    }
  }
}

TEST_CASE("HCT element with zero DOFs vanishes") {
  const ElementGeometry g =
      standalone_geometry({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)});
  const HctElement el = build_hct(g);
  const auto combined = el.combine(Vector12d::Zero());
  for (int s = 0; s < 3; ++s) CHECK(combined[s].cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("HCT pieces join with C1 continuity for random DOFs") {
  const ElementGeometry g =
      standalone_geometry({Vec2(-0.2, 0.1), Vec2(1.0, -0.3), Vec2(0.5, 0.9)});
  const HctElement el = build_hct(g);
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector12d dofs;
  for (int i = 0; i < 12; ++i) dofs[i] = u(rng);
  const auto c = el.combine(dofs);

  for (int j = 0; j < 3; ++j) {
    const int s1 = j, s2 = (j + 2) % 3;
    const Vec2 dir = g.corners[j] - el.centroid;
    for (const SegPoint& q : gauss_segment(3)) {
      const Vec2 lp = el.local(el.centroid + q.t * dir);
      CHECK(std::abs(el.value_local(c[s1], lp) - el.value_local(c[s2], lp)) <
            1e-9);
      CHECK((el.grad_local(c[s1], lp) - el.grad_local(c[s2], lp)).norm() <
            1e-9);
    }
  }
}

TEST_CASE("degenerate macro triangles are rejected") {
  CHECK_THROWS_AS(
      standalone_geometry({Vec2(0, 0), Vec2(1, 0), Vec2(1, 0)}),
      GeometryError);
}

TEST_CASE("enriching preserves the Morley DOFs") {
  const Mesh mesh = Mesh::crisscross(3);
  const ElementCache cache(mesh);
  const HctSpace space(mesh);
  const Eigen::VectorXd u = random_vector(mesh.n_dofs(), 9);
  const HctField f = enrich_to_hct(cache, u);
  const HctEval ev{&space, &f};

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto view = ev.view(t);
    const Triangle& tri = mesh.triangle(t);
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(view.value(mesh.vertex(tri.v[j])) - u[tri.v[j]]) < 1e-9);
    for (int i = 0; i < 3; ++i) {
      const Edge& e = mesh.edge(tri.e[i]);
      const double dn = view.grad(e.midpoint).dot(e.normal);
      CHECK(std::abs(dn - u[mesh.edge_dof(tri.e[i])]) < 1e-9);
    }
  }
}

TEST_CASE("enriching is exact on global quadratics and constants") {
  const Mesh mesh = Mesh::crisscross(3);
  const ElementCache cache(mesh);
  const HctSpace space(mesh);
  for (const ScalarFunction& q :
       {quadratic(0.5, 1.0, -2.0, 0.7, -0.4, 1.1), constant_function(2.0)}) {
    const Eigen::VectorXd u = interpolate(mesh, q);
    const HctField f = enrich_to_hct(cache, u);
    const auto diff = difference(HctEval{&space, &f}, AnalyticEval{&q});
    CHECK(broken_norm(mesh, diff, 2) < 1e-10);
  }
}

TEST_CASE("enriching is linear") {
  const Mesh mesh = Mesh::crisscross(2);
  const ElementCache cache(mesh);
  const HctSpace space(mesh);
  const Eigen::VectorXd u = random_vector(mesh.n_dofs(), 31);
  const Eigen::VectorXd v = random_vector(mesh.n_dofs(), 32);
  const Eigen::VectorXd w = 2.0 * u - 3.0 * v;
  const HctField fu = enrich_to_hct(cache, u);
  const HctField fv = enrich_to_hct(cache, v);
  const HctField fw = enrich_to_hct(cache, w);
  CHECK((fw.vertex_vals - 2.0 * fu.vertex_vals + 3.0 * fv.vertex_vals)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK((fw.vertex_grads - 2.0 * fu.vertex_grads + 3.0 * fv.vertex_grads)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK((fw.edge_nd - 2.0 * fu.edge_nd + 3.0 * fv.edge_nd).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("enrichment error converges at orders 2 and 1") {
  const ScalarFunction v = sin_cos();
  std::vector<double> hs, err0, err1;
  for (int n : {8, 16, 32}) {
    const Mesh mesh = Mesh::crisscross(n);
    const ElementCache cache(mesh);
    const HctSpace space(mesh);
    const Eigen::VectorXd u = interpolate(mesh, v);
    const HctField f = enrich_to_hct(cache, u);
    const auto diff = difference(HctEval{&space, &f}, MorleyEval{&cache, &u});
    hs.push_back(mesh.grid_h());
    err0.push_back(broken_norm(mesh, diff, 0));
    err1.push_back(broken_norm(mesh, diff, 1));
  }
  CAPTURE(err0[0], err0[2], err1[0], err1[2]);
  CHECK(fitted_order(hs, err0) > 1.8);
  CHECK(fitted_order(hs, err1) > 0.9);
}
