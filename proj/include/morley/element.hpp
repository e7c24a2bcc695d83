#pragma once

// Morley element basis per triangle.  Six shape functions, stored as
// coefficients in the physical monomial basis {1, x, y, x^2, xy, y^2}.
// Local DOF order: values at the three vertices, then the derivative along
// the fixed global edge normal at the three edge midpoints (edge i opposite
// vertex i).

#include <Eigen/Dense>
#include <array>

#include "morley/mesh.hpp"

namespace morley {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Geometry a Morley element is built from; decoupled from Mesh so tests can
// run on free-standing triangles.
struct ElementGeometry {
  std::array<Vec2, 3> corners;
  std::array<Vec2, 3> edge_normals;    // fixed unit normal of edge i
  std::array<Vec2, 3> edge_midpoints;  // midpoint of edge i
};

inline ElementGeometry element_geometry(const Mesh& mesh, int t) {
  const Triangle& tri = mesh.triangle(t);
  ElementGeometry g;
  for (int k = 0; k < 3; ++k) {
    g.corners[k] = mesh.vertex(tri.v[k]);
    const Edge& e = mesh.edge(tri.e[k]);
    g.edge_normals[k] = e.normal;
    g.edge_midpoints[k] = e.midpoint;
  }
  return g;
}

// For triangles not backed by a mesh: normal of edge i is the direction from
// v[(i+1)%3] to v[(i+2)%3] rotated by +90 degrees.
inline ElementGeometry standalone_geometry(const std::array<Vec2, 3>& corners) {
  ElementGeometry g;
  g.corners = corners;
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = corners[(i + 1) % 3];
    const Vec2& b = corners[(i + 2) % 3];
    const double len = (b - a).norm();
    if (len <= 0.0) throw GeometryError("standalone_geometry: repeated corner");
    const Vec2 t = (b - a) / len;
    g.edge_normals[i] = Vec2(-t.y(), t.x());
    g.edge_midpoints[i] = 0.5 * (a + b);
  }
  return g;
}

namespace detail {

inline Vector6d monomials(const Vec2& p) {
  Vector6d m;
  m << 1.0, p.x(), p.y(), p.x() * p.x(), p.x() * p.y(), p.y() * p.y();
  return m;
}

inline Vector6d monomials_dn(const Vec2& p, const Vec2& n) {
  // Normal derivative of each monomial at p.
  Vector6d m;
  m << 0.0, n.x(), n.y(), 2.0 * p.x() * n.x(), p.y() * n.x() + p.x() * n.y(),
      2.0 * p.y() * n.y();
  return m;
}

}  // namespace detail

// Quadratic polynomial given by monomial coefficients; the common currency
// for evaluating shapes and fields.
struct LocalPoly {
  Vector6d c;

  double value(const Vec2& p) const {
    return c[0] + c[1] * p.x() + c[2] * p.y() + c[3] * p.x() * p.x() +
           c[4] * p.x() * p.y() + c[5] * p.y() * p.y();
  }
  Vec2 grad(const Vec2& p) const {
    return Vec2(c[1] + 2.0 * c[3] * p.x() + c[4] * p.y(),
                c[2] + c[4] * p.x() + 2.0 * c[5] * p.y());
  }
  Eigen::Matrix2d hess() const {
    Eigen::Matrix2d h;
    h << 2.0 * c[3], c[4], c[4], 2.0 * c[5];
    return h;
  }
};

struct MorleyElement {
  Matrix6d coeffs;  // column s holds the monomial coefficients of shape s

  LocalPoly shape(int s) const { return LocalPoly{coeffs.col(s)}; }

  double shape_value(int s, const Vec2& p) const { return shape(s).value(p); }
  Vec2 shape_grad(int s, const Vec2& p) const { return shape(s).grad(p); }
  Eigen::Matrix2d shape_hess(int s) const { return shape(s).hess(); }

  // Combine local DOF values into one quadratic.
  LocalPoly combine(const Vector6d& local_dofs) const {
    return LocalPoly{coeffs * local_dofs};
  }
};

inline MorleyElement build_element(const ElementGeometry& g) {
  Matrix6d D;
  for (int j = 0; j < 3; ++j)
    D.row(j) = detail::monomials(g.corners[j]).transpose();
  for (int i = 0; i < 3; ++i)
    D.row(3 + i) =
        detail::monomials_dn(g.edge_midpoints[i], g.edge_normals[i]).transpose();

  Eigen::PartialPivLU<Matrix6d> lu(D);
  const Vector6d diag = lu.matrixLU().diagonal().cwiseAbs();
  if (diag.minCoeff() < 1e-10 * diag.maxCoeff())
    throw GeometryError("build_element: DOF matrix is rank deficient");

  MorleyElement el;
  el.coeffs = lu.solve(Matrix6d::Identity());
  return el;
}

class ElementCache {
 public:
  explicit ElementCache(const Mesh& mesh) : mesh_(&mesh) {
    elements_.reserve(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t)
      elements_.push_back(build_element(element_geometry(mesh, t)));
  }

  const MorleyElement& operator[](int t) const { return elements_[t]; }
  const Mesh& mesh() const { return *mesh_; }

  // Global DOF ids feeding the six local DOFs of triangle t.
  std::array<int, 6> global_dofs(int t) const {
    const Triangle& tri = mesh_->triangle(t);
    return {tri.v[0],
            tri.v[1],
            tri.v[2],
            mesh_->edge_dof(tri.e[0]),
            mesh_->edge_dof(tri.e[1]),
            mesh_->edge_dof(tri.e[2])};
  }

  // The field restricted to triangle t as a quadratic polynomial.
  LocalPoly local_poly(int t, const Eigen::VectorXd& u) const {
    const auto dofs = global_dofs(t);
    Vector6d local;
    for (int j = 0; j < 6; ++j) local[j] = u[dofs[j]];
    return elements_[t].combine(local);
  }

 private:
  const Mesh* mesh_;
  std::vector<MorleyElement> elements_;
};

}  // namespace morley
