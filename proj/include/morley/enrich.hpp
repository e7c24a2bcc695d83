#pragma once

// Nodal interpolation onto the Morley space, the C^1 (HCT macro element)
// enriching operator, and broken Sobolev norms/seminorms evaluated per
// triangle for any combination of discrete and analytic fields.

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "morley/element.hpp"
#include "morley/functions.hpp"
#include "morley/quadrature.hpp"

namespace morley {

// ---------------------------------------------------------------------------
// Nodal interpolant: vertex values plus edge averages of the normal
// derivative (3-point Gauss per edge, exact for quadratics).

inline Eigen::VectorXd interpolate(const Mesh& mesh, const ScalarFunction& f) {
  if (!f.value || !f.has_grad())
    throw std::invalid_argument("interpolate: needs value and gradient data");
  Eigen::VectorXd u(mesh.n_dofs());
  for (int v = 0; v < mesh.n_vertices(); ++v) u[v] = f.value(mesh.vertex(v));
  const auto g3 = gauss_segment(3);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    const Vec2 a = mesh.vertex(edge.v[0]);
    const Vec2 b = mesh.vertex(edge.v[1]);
    double avg = 0.0;
    for (const SegPoint& q : g3)
      avg += q.w * f.grad((1.0 - q.t) * a + q.t * b).dot(edge.normal);
    u[mesh.edge_dof(e)] = avg;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Field evaluators.  Each exposes view(t) returning an object with value,
// grad and hess at physical points of triangle t; broken_norm integrates any
// such evaluator.

struct MorleyEval {
  const ElementCache* cache;
  const Eigen::VectorXd* u;

  struct View {
    LocalPoly poly;
    double value(const Vec2& p) const { return poly.value(p); }
    Vec2 grad(const Vec2& p) const { return poly.grad(p); }
    Eigen::Matrix2d hess(const Vec2&) const { return poly.hess(); }
  };
  View view(int t) const { return View{cache->local_poly(t, *u)}; }
};

struct AnalyticEval {
  const ScalarFunction* f;

  struct View {
    const ScalarFunction* f;
    double value(const Vec2& p) const { return f->value(p); }
    Vec2 grad(const Vec2& p) const { return f->grad(p); }
    Eigen::Matrix2d hess(const Vec2& p) const { return f->hess(p); }
  };
  View view(int) const { return View{f}; }
};

template <class A, class B>
struct DiffEval {
  A a;
  B b;

  template <class VA, class VB>
  struct View {
    VA va;
    VB vb;
    double value(const Vec2& p) const { return va.value(p) - vb.value(p); }
    Vec2 grad(const Vec2& p) const { return va.grad(p) - vb.grad(p); }
    Eigen::Matrix2d hess(const Vec2& p) const { return va.hess(p) - vb.hess(p); }
  };
  auto view(int t) const {
    return View<decltype(a.view(t)), decltype(b.view(t))>{a.view(t), b.view(t)};
  }
};

template <class A, class B>
DiffEval<A, B> difference(A a, B b) {
  return DiffEval<A, B>{a, b};
}

// |v|_{j,2,h}: broken L2 norm of the j-th derivatives; j = 2 uses the
// Frobenius norm of the Hessian, so the mixed derivative counts twice.
template <class E>
double broken_seminorm(const Mesh& mesh, const E& eval, int j, int qdegree = 8) {
  if (j < 0 || j > 2)
    throw std::invalid_argument("broken_seminorm: j must be 0, 1 or 2");
  const TriangleRule& rule = triangle_rule(qdegree);
  double acc = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto view = eval.view(t);
    const auto corners = mesh.corners(t);
    const double area = mesh.triangle(t).area;
    for (const QuadPoint& q : rule.points) {
      const Vec2 p = map_to_triangle(corners, q);
      double density = 0.0;
      if (j == 0) {
        const double v = view.value(p);
        density = v * v;
      } else if (j == 1) {
        density = view.grad(p).squaredNorm();
      } else {
        density = view.hess(p).squaredNorm();
      }
      acc += area * q.w * density;
    }
  }
  return std::sqrt(acc);
}

// ||v||_{j,2,h}: full broken norm, seminorms of orders 0..j combined.
template <class E>
double broken_norm(const Mesh& mesh, const E& eval, int j, int qdegree = 8) {
  double acc = 0.0;
  for (int i = 0; i <= j; ++i) {
    const double s = broken_seminorm(mesh, eval, i, qdegree);
    acc += s * s;
  }
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// HCT macro element: each triangle split at its centroid into three cubics,
// C^1 across the internal edges.  12 DOFs: value and gradient at the three
// vertices, normal derivative (global edge normal) at the three outer edge
// midpoints.

using Vector10d = Eigen::Matrix<double, 10, 1>;
using Vector12d = Eigen::Matrix<double, 12, 1>;

namespace detail {

inline Vector10d cubic_monomials(const Vec2& p) {
  const double x = p.x(), y = p.y();
  Vector10d m;
  m << 1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y,
      y * y * y;
  return m;
}

inline Vector10d cubic_dx(const Vec2& p) {
  const double x = p.x(), y = p.y();
  Vector10d m;
  m << 0.0, 1.0, 0.0, 2.0 * x, y, 0.0, 3.0 * x * x, 2.0 * x * y, y * y, 0.0;
  return m;
}

inline Vector10d cubic_dy(const Vec2& p) {
  const double x = p.x(), y = p.y();
  Vector10d m;
  m << 0.0, 0.0, 1.0, 0.0, x, 2.0 * y, 0.0, x * x, 2.0 * x * y, 3.0 * y * y;
  return m;
}

inline Vector10d cubic_dxx(const Vec2& p) {
  Vector10d m;
  m << 0, 0, 0, 2.0, 0, 0, 6.0 * p.x(), 2.0 * p.y(), 0, 0;
  return m;
}

inline Vector10d cubic_dxy(const Vec2& p) {
  Vector10d m;
  m << 0, 0, 0, 0, 1.0, 0, 0, 2.0 * p.x(), 2.0 * p.y(), 0;
  return m;
}

inline Vector10d cubic_dyy(const Vec2& p) {
  Vector10d m;
  m << 0, 0, 0, 0, 0, 2.0, 0, 0, 2.0 * p.x(), 6.0 * p.y();
  return m;
}

}  // namespace detail

struct HctElement {
  std::array<Vec2, 3> corners;
  Vec2 centroid;
  double scale;  // local frame: (p - centroid) / scale
  // 12 nodal shapes; rows are cubic coefficients, 10 per sub-triangle.
  // Sub-triangle j spans (v_j, v_{j+1}, centroid).
  Eigen::Matrix<double, 30, 12> basis;

  Vec2 local(const Vec2& p) const { return (p - centroid) / scale; }

  // Sub-triangle whose barycentric coordinates of p are the least negative.
  int find_subtri(const Vec2& p) const {
    int best = 0;
    double best_min = -1e30;
    for (int j = 0; j < 3; ++j) {
      const Vec2& a = corners[j];
      const Vec2& b = corners[(j + 1) % 3];
      const Vec2& c = centroid;
      const double det = (b.x() - a.x()) * (c.y() - a.y()) -
                         (c.x() - a.x()) * (b.y() - a.y());
      const double l1 = ((p.x() - a.x()) * (c.y() - a.y()) -
                         (c.x() - a.x()) * (p.y() - a.y())) /
                        det;
      const double l2 = ((b.x() - a.x()) * (p.y() - a.y()) -
                         (p.x() - a.x()) * (b.y() - a.y())) /
                        det;
      const double m = std::min({1.0 - l1 - l2, l1, l2});
      if (m > best_min) {
        best_min = m;
        best = j;
      }
    }
    return best;
  }

  // Combined cubic coefficients on each sub-triangle for given DOF values.
  std::array<Vector10d, 3> combine(const Vector12d& dofs) const {
    std::array<Vector10d, 3> c;
    for (int j = 0; j < 3; ++j)
      c[j] = basis.block<10, 12>(10 * j, 0) * dofs;
    return c;
  }

  double value_local(const Vector10d& c, const Vec2& lp) const {
    return c.dot(detail::cubic_monomials(lp));
  }
  Vec2 grad_local(const Vector10d& c, const Vec2& lp) const {
    return Vec2(c.dot(detail::cubic_dx(lp)), c.dot(detail::cubic_dy(lp))) /
           scale;
  }
  Eigen::Matrix2d hess_local(const Vector10d& c, const Vec2& lp) const {
    Eigen::Matrix2d h;
    h << c.dot(detail::cubic_dxx(lp)), c.dot(detail::cubic_dxy(lp)),
        c.dot(detail::cubic_dxy(lp)), c.dot(detail::cubic_dyy(lp));
    return h / (scale * scale);
  }
};

// DOF order used throughout: v0, v0x, v0y, v1, v1x, v1y, v2, v2x, v2y,
// n0, n1, n2 (outer edge i opposite vertex i).
inline HctElement build_hct(const ElementGeometry& g) {
  HctElement el;
  el.corners = g.corners;
  el.centroid = (g.corners[0] + g.corners[1] + g.corners[2]) / 3.0;
  const double area2 = std::abs(
      (g.corners[1] - g.corners[0]).x() * (g.corners[2] - g.corners[0]).y() -
      (g.corners[2] - g.corners[0]).x() * (g.corners[1] - g.corners[0]).y());
  if (area2 <= 0.0) throw GeometryError("build_hct: degenerate triangle");
  el.scale = std::sqrt(0.5 * area2);

  Eigen::Matrix<double, 33, 30> A = Eigen::Matrix<double, 33, 30>::Zero();
  Eigen::Matrix<double, 33, 12> rhs = Eigen::Matrix<double, 33, 12>::Zero();

  auto block = [&](int row, int sub) {
    return A.block<1, 10>(row, 10 * sub);
  };

  // DOF rows.  Vertex v_j is the first vertex of sub-triangle j.
  int row = 0;
  for (int j = 0; j < 3; ++j) {
    const Vec2 lp = el.local(g.corners[j]);
    block(row, j) = detail::cubic_monomials(lp).transpose();
    rhs(row, 3 * j) = 1.0;
    ++row;
    block(row, j) = detail::cubic_dx(lp).transpose() / el.scale;
    rhs(row, 3 * j + 1) = 1.0;
    ++row;
    block(row, j) = detail::cubic_dy(lp).transpose() / el.scale;
    rhs(row, 3 * j + 2) = 1.0;
    ++row;
  }
  // Outer edge i (joining v_{i+1}, v_{i+2}) lies on sub-triangle (i+1)%3.
  for (int i = 0; i < 3; ++i) {
    const int sub = (i + 1) % 3;
    const Vec2 lp = el.local(g.edge_midpoints[i]);
    const Vec2& n = g.edge_normals[i];
    block(row, sub) = (n.x() * detail::cubic_dx(lp).transpose() +
                       n.y() * detail::cubic_dy(lp).transpose()) /
                      el.scale;
    rhs(row, 9 + i) = 1.0;
    ++row;
  }

  // C^1 collocation across internal edges (centroid -> v_j), shared by
  // sub-triangles j and (j+2)%3.  Value jump is a cubic along the edge (four
  // points); normal-derivative jump is a quadratic (three points).
  for (int j = 0; j < 3; ++j) {
    const int s1 = j;
    const int s2 = (j + 2) % 3;
    const Vec2 dir = (g.corners[j] - el.centroid).normalized();
    const Vec2 n(-dir.y(), dir.x());
    for (double t : {0.2, 0.4, 0.6, 0.8}) {
      const Vec2 lp = el.local(el.centroid + t * (g.corners[j] - el.centroid));
      block(row, s1) = detail::cubic_monomials(lp).transpose();
      block(row, s2) -= detail::cubic_monomials(lp).transpose();
      ++row;
    }
    for (double t : {0.25, 0.5, 0.75}) {
      const Vec2 lp = el.local(el.centroid + t * (g.corners[j] - el.centroid));
      const Eigen::Matrix<double, 1, 10> dn =
          (n.x() * detail::cubic_dx(lp) + n.y() * detail::cubic_dy(lp))
              .transpose() /
          el.scale;
      block(row, s1) = dn;
      block(row, s2) -= dn;
      ++row;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 33, 30>> qr(A);
  if (qr.rank() < 30)
    throw GeometryError("build_hct: constraint system is rank deficient");
  el.basis = qr.solve(rhs);
  if ((A * el.basis - rhs).cwiseAbs().maxCoeff() > 1e-8)
    throw GeometryError("build_hct: constraint residual too large");
  return el;
}

// Per-mesh cache of HCT elements (field independent).
class HctSpace {
 public:
  explicit HctSpace(const Mesh& mesh) : mesh_(&mesh) {
    elements_.reserve(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t)
      elements_.push_back(build_hct(element_geometry(mesh, t)));
  }

  const HctElement& operator[](int t) const { return elements_[t]; }
  const Mesh& mesh() const { return *mesh_; }

 private:
  const Mesh* mesh_;
  std::vector<HctElement> elements_;
};

struct HctField {
  Eigen::VectorXd vertex_vals;                       // one per vertex
  Eigen::Matrix<double, Eigen::Dynamic, 2> vertex_grads;  // one row per vertex
  Eigen::VectorXd edge_nd;                           // one per edge
};

inline Vector12d hct_local_dofs(const Mesh& mesh, const HctField& f, int t) {
  const Triangle& tri = mesh.triangle(t);
  Vector12d d;
  for (int j = 0; j < 3; ++j) {
    d[3 * j] = f.vertex_vals[tri.v[j]];
    d[3 * j + 1] = f.vertex_grads(tri.v[j], 0);
    d[3 * j + 2] = f.vertex_grads(tri.v[j], 1);
  }
  for (int i = 0; i < 3; ++i) d[9 + i] = f.edge_nd[tri.e[i]];
  return d;
}

// Enriching operator: keeps vertex values and edge normal DOFs, takes the
// arithmetic mean of the incident triangle gradients at each vertex.
inline HctField enrich_to_hct(const ElementCache& cache,
                              const Eigen::VectorXd& u) {
  const Mesh& mesh = cache.mesh();
  HctField f;
  f.vertex_vals = u.head(mesh.n_vertices());
  f.vertex_grads.resize(mesh.n_vertices(), 2);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    Vec2 g = Vec2::Zero();
    const auto& tris = mesh.vertex_triangles(v);
    for (int t : tris) g += cache.local_poly(t, u).grad(mesh.vertex(v));
    g /= static_cast<double>(tris.size());
    f.vertex_grads(v, 0) = g.x();
    f.vertex_grads(v, 1) = g.y();
  }
  f.edge_nd = u.tail(mesh.n_edges());
  return f;
}

struct HctEval {
  const HctSpace* space;
  const HctField* field;

  struct View {
    const HctElement* el;
    std::array<Vector10d, 3> coeffs;
    double value(const Vec2& p) const {
      const int s = el->find_subtri(p);
      return el->value_local(coeffs[s], el->local(p));
    }
    Vec2 grad(const Vec2& p) const {
      const int s = el->find_subtri(p);
      return el->grad_local(coeffs[s], el->local(p));
    }
    Eigen::Matrix2d hess(const Vec2& p) const {
      const int s = el->find_subtri(p);
      return el->hess_local(coeffs[s], el->local(p));
    }
  };
  View view(int t) const {
    const HctElement& el = (*space)[t];
    return View{&el, el.combine(hct_local_dofs(space->mesh(), *field, t))};
  }
};

}  // namespace morley
