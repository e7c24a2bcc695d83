#pragma once

// Conforming P2 Neumann-Poisson solver on a red-refined companion mesh (the
// reference for the continuous inverse Laplacian and the H^-1 norm), plus the
// two discrete inverse Laplacians driven by b_h = a_h + beta (.,.).

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "morley/forms.hpp"

namespace morley {

// Plain conforming triangulation carrying, per triangle, the id of the base
// Morley triangle it refines (so fields of both meshes can be integrated
// against each other).
struct P2Mesh {
  struct Tri {
    std::array<int, 3> v;
    int root;
  };

  std::vector<Vec2> verts;
  std::vector<Tri> tris;
  std::vector<std::array<int, 3>> tri_edges;  // edge k opposite vertex k
  std::vector<std::array<int, 2>> edges;      // sorted endpoint pairs
  double domain_area = 0.0;

  int n_nodes() const {
    return static_cast<int>(verts.size() + edges.size());
  }
  int edge_node(int e) const { return static_cast<int>(verts.size()) + e; }

  Vec2 node_position(int i) const {
    const int nv = static_cast<int>(verts.size());
    if (i < nv) return verts[i];
    const auto& e = edges[i - nv];
    return 0.5 * (verts[e[0]] + verts[e[1]]);
  }

  static P2Mesh from(const Mesh& base) {
    P2Mesh p;
    p.verts.resize(base.n_vertices());
    for (int i = 0; i < base.n_vertices(); ++i) p.verts[i] = base.vertex(i);
    p.tris.reserve(base.n_triangles());
    for (int t = 0; t < base.n_triangles(); ++t) {
      const Triangle& tri = base.triangle(t);
      p.tris.push_back({{tri.v[0], tri.v[1], tri.v[2]}, t});
    }
    p.domain_area = base.box().width() * base.box().height();
    p.index_edges();
    return p;
  }

  P2Mesh refined() const {
    P2Mesh out;
    out.domain_area = domain_area;
    out.verts = verts;
    out.verts.reserve(verts.size() + edges.size());
    for (const auto& e : edges)
      out.verts.push_back(0.5 * (verts[e[0]] + verts[e[1]]));
    out.tris.reserve(4 * tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const auto& v = tris[t].v;
      const int root = tris[t].root;
      const int m0 = edge_node(tri_edges[t][0]);  // mid of (v1, v2)
      const int m1 = edge_node(tri_edges[t][1]);  // mid of (v2, v0)
      const int m2 = edge_node(tri_edges[t][2]);  // mid of (v0, v1)
      out.tris.push_back({{v[0], m2, m1}, root});
      out.tris.push_back({{m2, v[1], m0}, root});
      out.tris.push_back({{m1, m0, v[2]}, root});
      out.tris.push_back({{m0, m1, m2}, root});
    }
    out.index_edges();
    return out;
  }

  std::array<Vec2, 3> corners(int t) const {
    return {verts[tris[t].v[0]], verts[tris[t].v[1]], verts[tris[t].v[2]]};
  }

 private:
  void index_edges() {
    std::unordered_map<std::int64_t, int> ids;
    const std::int64_t nv = static_cast<std::int64_t>(verts.size());
    tri_edges.resize(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int k = 0; k < 3; ++k) {
        int a = tris[t].v[(k + 1) % 3];
        int b = tris[t].v[(k + 2) % 3];
        if (a > b) std::swap(a, b);
        const std::int64_t key = a * nv + b;
        auto [it, fresh] = ids.emplace(key, static_cast<int>(edges.size()));
        if (fresh) edges.push_back({a, b});
        tri_edges[t][k] = it->second;
      }
    }
  }
};

namespace detail {

struct P2TriGeom {
  std::array<Vec2, 3> glam;  // barycentric gradients
  double area;
};

inline P2TriGeom p2_geometry(const std::array<Vec2, 3>& c) {
  const double a2 = (c[1] - c[0]).x() * (c[2] - c[0]).y() -
                    (c[2] - c[0]).x() * (c[1] - c[0]).y();
  if (a2 <= 0.0) throw GeometryError("p2_geometry: degenerate triangle");
  P2TriGeom g;
  g.area = 0.5 * a2;
  for (int i = 0; i < 3; ++i) {
    const Vec2 d = c[(i + 2) % 3] - c[(i + 1) % 3];
    g.glam[i] = Vec2(-d.y(), d.x()) / a2;
  }
  return g;
}

// P2 shapes on barycentric coordinates: vertex k then edge k (opposite k).
inline std::array<double, 6> p2_values(const QuadPoint& q) {
  const double l[3] = {q.b0, q.b1, q.b2};
  return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
          4 * l[1] * l[2], 4 * l[2] * l[0], 4 * l[0] * l[1]};
}

inline std::array<Vec2, 6> p2_gradients(const QuadPoint& q, const P2TriGeom& g) {
  const double l[3] = {q.b0, q.b1, q.b2};
  return {(4 * l[0] - 1) * g.glam[0],
          (4 * l[1] - 1) * g.glam[1],
          (4 * l[2] - 1) * g.glam[2],
          4 * (l[2] * g.glam[1] + l[1] * g.glam[2]),
          4 * (l[0] * g.glam[2] + l[2] * g.glam[0]),
          4 * (l[1] * g.glam[0] + l[0] * g.glam[1])};
}

inline std::array<int, 6> p2_nodes(const P2Mesh& m, int t) {
  return {m.tris[t].v[0],          m.tris[t].v[1],
          m.tris[t].v[2],          m.edge_node(m.tri_edges[t][0]),
          m.edge_node(m.tri_edges[t][1]), m.edge_node(m.tri_edges[t][2])};
}

}  // namespace detail

// Neumann Poisson solve -Lap u = zeta, int u = 0, discretized with conforming
// P2 on `refine` red refinements of the base mesh.  The zero mean is imposed
// through a Lagrange multiplier row, keeping the system symmetric.
class PoissonOracle {
 public:
  explicit PoissonOracle(const Mesh& base, int refine = 2) : refine_(refine) {
    if (refine < 0 || refine > 2)
      throw std::invalid_argument("PoissonOracle: refine must be 0, 1 or 2");
    mesh_ = P2Mesh::from(base);
    for (int r = 0; r < refine; ++r) mesh_ = mesh_.refined();
    assemble();
  }

  int refine_level() const { return refine_; }
  const P2Mesh& mesh() const { return mesh_; }
  int n_nodes() const { return mesh_.n_nodes(); }

  // RHS from an analytic density.
  Eigen::VectorXd solve(const std::function<double(const Vec2&)>& zeta) const {
    const TriangleRule& rule = triangle_rule(8);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_nodes());
    double integral = 0.0, norm2 = 0.0;
    for (std::size_t t = 0; t < mesh_.tris.size(); ++t) {
      const auto c = mesh_.corners(static_cast<int>(t));
      const auto g = detail::p2_geometry(c);
      const auto nodes = detail::p2_nodes(mesh_, static_cast<int>(t));
      for (const QuadPoint& q : rule.points) {
        const Vec2 x = map_to_triangle(c, q);
        const double zv = zeta(x);
        const double w = g.area * q.w;
        integral += w * zv;
        norm2 += w * zv * zv;
        const auto vals = detail::p2_values(q);
        for (int i = 0; i < 6; ++i) rhs[nodes[i]] += w * zv * vals[i];
      }
    }
    return constrained_solve(rhs, integral, norm2);
  }

  // RHS from a Morley field on the base mesh.
  Eigen::VectorXd solve(const ElementCache& cache,
                        const Eigen::VectorXd& zeta) const {
    const TriangleRule& rule = triangle_rule(4);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_nodes());
    double integral = 0.0, norm2 = 0.0;
    for (std::size_t t = 0; t < mesh_.tris.size(); ++t) {
      const auto c = mesh_.corners(static_cast<int>(t));
      const auto g = detail::p2_geometry(c);
      const auto nodes = detail::p2_nodes(mesh_, static_cast<int>(t));
      const LocalPoly zp = cache.local_poly(mesh_.tris[t].root, zeta);
      for (const QuadPoint& q : rule.points) {
        const Vec2 x = map_to_triangle(c, q);
        const double zv = zp.value(x);
        const double w = g.area * q.w;
        integral += w * zv;
        norm2 += w * zv * zv;
        const auto vals = detail::p2_values(q);
        for (int i = 0; i < 6; ++i) rhs[nodes[i]] += w * zv * vals[i];
      }
    }
    return constrained_solve(rhs, integral, norm2);
  }

  // ||grad u_h|| of a P2 coefficient vector, via the stiffness form.
  double gradient_norm(const Eigen::VectorXd& z) const {
    return std::sqrt(std::max(0.0, z.dot(K_ * z)));
  }

  // (z, phi_i)_h against the Morley basis of the base mesh.
  Eigen::VectorXd cross_functional(const ElementCache& cache,
                                   const Eigen::VectorXd& z) const {
    const TriangleRule& rule = triangle_rule(4);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cache.mesh().n_dofs());
    for (std::size_t t = 0; t < mesh_.tris.size(); ++t) {
      const auto c = mesh_.corners(static_cast<int>(t));
      const auto g = detail::p2_geometry(c);
      const auto nodes = detail::p2_nodes(mesh_, static_cast<int>(t));
      const int root = mesh_.tris[t].root;
      const auto dofs = cache.global_dofs(root);
      for (const QuadPoint& q : rule.points) {
        const Vec2 x = map_to_triangle(c, q);
        const auto vals = detail::p2_values(q);
        double zv = 0.0;
        for (int i = 0; i < 6; ++i) zv += z[nodes[i]] * vals[i];
        const double w = g.area * q.w * zv;
        for (int j = 0; j < 6; ++j)
          out[dofs[j]] += w * cache[root].shape_value(j, x);
      }
    }
    return out;
  }

 private:
  void assemble() {
    const int n = n_nodes();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(36 * mesh_.tris.size());
    mvec_ = Eigen::VectorXd::Zero(n);
    const TriangleRule& rule = triangle_rule(2);
    for (std::size_t t = 0; t < mesh_.tris.size(); ++t) {
      const auto c = mesh_.corners(static_cast<int>(t));
      const auto g = detail::p2_geometry(c);
      const auto nodes = detail::p2_nodes(mesh_, static_cast<int>(t));
      Matrix6d K = Matrix6d::Zero();
      Vector6d m = Vector6d::Zero();
      for (const QuadPoint& q : rule.points) {
        const auto grads = detail::p2_gradients(q, g);
        const auto vals = detail::p2_values(q);
        const double w = g.area * q.w;
        for (int i = 0; i < 6; ++i) {
          m[i] += w * vals[i];
          for (int j = 0; j < 6; ++j) K(i, j) += w * grads[i].dot(grads[j]);
        }
      }
      for (int i = 0; i < 6; ++i) {
        mvec_[nodes[i]] += m[i];
        for (int j = 0; j < 6; ++j)
          trips.emplace_back(nodes[i], nodes[j], K(i, j));
      }
    }
    K_.resize(n, n);
    K_.setFromTriplets(trips.begin(), trips.end());

    // Augmented [[K, m], [m^T, 0]].
    for (int i = 0; i < n; ++i) {
      trips.emplace_back(i, n, mvec_[i]);
      trips.emplace_back(n, i, mvec_[i]);
    }
    SpMat aug(n + 1, n + 1);
    aug.setFromTriplets(trips.begin(), trips.end());
    aug.makeCompressed();
    lu_.compute(aug);
    if (lu_.info() != Eigen::Success)
      throw SolverError("PoissonOracle: factorization failed");
    aug_ = std::move(aug);
  }

  Eigen::VectorXd constrained_solve(const Eigen::VectorXd& rhs, double integral,
                                    double norm2) const {
    const double norm = std::sqrt(std::max(0.0, norm2));
    if (norm == 0.0) return Eigen::VectorXd::Zero(n_nodes());
    if (std::abs(integral) > 1e-8 * std::sqrt(mesh_.domain_area) * norm)
      throw CompatibilityError(
          "PoissonOracle: density has nonzero mean (Neumann data must be "
          "compatible)");
    Eigen::VectorXd full(n_nodes() + 1);
    full.head(n_nodes()) = rhs;
    full[n_nodes()] = 0.0;
    const Eigen::VectorXd sol = lu_.solve(full);
    if ((aug_ * sol - full).norm() > 1e-10 * (1.0 + full.norm()))
      throw SolverError("PoissonOracle: linear residual too large");
    const Eigen::VectorXd z = sol.head(n_nodes());
    if (std::abs(mvec_.dot(z)) > 1e-10 * (1.0 + z.norm()))
      throw SolverError("PoissonOracle: zero-mean constraint violated");
    return z;
  }

  int refine_;
  P2Mesh mesh_;
  SpMat K_, aug_;
  Eigen::VectorXd mvec_;
  Eigen::SparseLU<SpMat> lu_;
};

// ||grad Delta^-1 zeta||: the H^-1 norm of zero-mean data.
inline double h_minus1_norm(const PoissonOracle& oracle,
                            const std::function<double(const Vec2&)>& zeta) {
  return oracle.gradient_norm(oracle.solve(zeta));
}

inline double h_minus1_norm(const PoissonOracle& oracle,
                            const ElementCache& cache,
                            const Eigen::VectorXd& zeta) {
  return oracle.gradient_norm(oracle.solve(cache, zeta));
}

// Shift a Morley field by a constant (vertex values only; edge DOFs are
// derivatives) so its integral vanishes, making it Neumann-compatible.
inline Eigen::VectorXd de_mean(const ElementCache& cache, Eigen::VectorXd u) {
  const Rect& box = cache.mesh().box();
  const double mean = field_integral(cache, u) / (box.width() * box.height());
  u.head(cache.mesh().n_vertices()).array() -= mean;
  return u;
}

namespace detail {

inline Eigen::VectorXd invlap_solve(const ElementCache& cache,
                                    const Eigen::VectorXd& rhs, double beta) {
  const SpMat B = assemble_a_h(cache) + beta * assemble_mass(cache);
  const DofMask mask = DofMask::essential(cache.mesh());
  SpMat Br = mask.reduce(B);
  Br.makeCompressed();
  Eigen::SparseLU<SpMat> lu(Br);
  if (lu.info() != Eigen::Success)
    throw SolverError("invlap_solve: factorization failed");
  const Eigen::VectorXd rr = mask.reduce(rhs);
  const Eigen::VectorXd xr = lu.solve(rr);
  if ((Br * xr - rr).norm() > 1e-10 * (1.0 + rr.norm()))
    throw SolverError("invlap_solve: linear residual too large");
  return mask.expand(xr);
}

}  // namespace detail

// Solution T of b_h(T, w) = (grad zeta, grad w)_h + beta(-Lap^-1 zeta, w) for
// all w in the reduced space; T approximates -Lap^-1 zeta.  The potential term
// is evaluated through the oracle.
inline Eigen::VectorXd tilde_inv_laplacian(const ElementCache& cache,
                                           const PoissonOracle& oracle,
                                           const Eigen::VectorXd& zeta,
                                           double beta = 1.0) {
  if (!(beta > 0.0))
    throw std::invalid_argument("tilde_inv_laplacian: beta must be positive");
  const Eigen::VectorXd z = oracle.solve(cache, zeta);
  const Eigen::VectorXd rhs = assemble_broken_grad(cache) * zeta +
                              beta * oracle.cross_functional(cache, z);
  return detail::invlap_solve(cache, rhs, beta);
}

// Same system plus the element-boundary correction B_h(-Lap^-1 zeta, w); the
// analytic `potential` (with hessian data) supplies the second derivatives
// that B_h needs, while the beta term still runs through the oracle.
inline Eigen::VectorXd hat_inv_laplacian(const ElementCache& cache,
                                         const PoissonOracle& oracle,
                                         const Eigen::VectorXd& zeta,
                                         const ScalarFunction& potential,
                                         double beta = 1.0) {
  if (!(beta > 0.0))
    throw std::invalid_argument("hat_inv_laplacian: beta must be positive");
  if (!potential.has_hess())
    throw std::invalid_argument("hat_inv_laplacian: potential hessian required");
  const Eigen::VectorXd z = oracle.solve(cache, zeta);
  const Eigen::VectorXd rhs = assemble_broken_grad(cache) * zeta +
                              beta * oracle.cross_functional(cache, z) +
                              bh_functional(cache, potential);
  return detail::invlap_solve(cache, rhs, beta);
}

}  // namespace morley
