#pragma once

// Assembly of the broken bilinear forms and nonlinear terms of the scheme,
// the element-boundary form B_h, the essential-DOF mask, and the weighted
// elliptic projection onto the Morley space.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <vector>

#include "morley/element.hpp"
#include "morley/errors.hpp"
#include "morley/functions.hpp"
#include "morley/quadrature.hpp"

namespace morley {

using SpMat = Eigen::SparseMatrix<double>;

// Double well F(u) = (u^2 - 1)^2 / 4; the scheme works with f = F'.
struct DoubleWell {
  static double F(double u) {
    const double s = u * u - 1.0;
    return 0.25 * s * s;
  }
  static double f(double u) { return u * (u * u - 1.0); }
  static double fp(double u) { return 3.0 * u * u - 1.0; }
  static double fpp(double u) { return 6.0 * u; }
};

namespace detail {

// Scatter per-triangle 6x6 blocks produced by `local` into a sparse matrix.
template <class LocalKernel>
SpMat assemble_matrix(const ElementCache& cache, LocalKernel local) {
  const Mesh& mesh = cache.mesh();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(36 * static_cast<std::size_t>(mesh.n_triangles()));
  Matrix6d K;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    local(t, K);
    const auto dofs = cache.global_dofs(t);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) trips.emplace_back(dofs[i], dofs[j], K(i, j));
  }
  SpMat A(mesh.n_dofs(), mesh.n_dofs());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

}  // namespace detail

// Broken mass matrix (u, v)_h.
inline SpMat assemble_mass(const ElementCache& cache) {
  const TriangleRule& rule = triangle_rule(4);
  return detail::assemble_matrix(cache, [&](int t, Matrix6d& K) {
    const auto c = cache.mesh().corners(t);
    const double area = cache.mesh().triangle(t).area;
    K.setZero();
    Vector6d v;
    for (const QuadPoint& q : rule.points) {
      const Vec2 x = map_to_triangle(c, q);
      for (int s = 0; s < 6; ++s) v[s] = cache[t].shape_value(s, x);
      K += (area * q.w) * v * v.transpose();
    }
  });
}

// a_h(w, v) = sum_T int [Dw Dv + w_xy v_xy - (w_xx v_yy + w_yy v_xx)/2].
// The integrand is constant per triangle for quadratics.
inline SpMat assemble_a_h(const ElementCache& cache) {
  return detail::assemble_matrix(cache, [&](int t, Matrix6d& K) {
    const double area = cache.mesh().triangle(t).area;
    std::array<Eigen::Matrix2d, 6> H;
    for (int s = 0; s < 6; ++s) H[s] = cache[t].shape_hess(s);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        K(i, j) = area * (H[i].trace() * H[j].trace() + H[i](0, 1) * H[j](0, 1) -
                          0.5 * (H[i](0, 0) * H[j](1, 1) + H[i](1, 1) * H[j](0, 0)));
  });
}

// Weighted broken stiffness (c grad u, grad v)_h; the weight is sampled per
// triangle so discrete fields can drive it as well as analytic ones.
inline SpMat assemble_weighted_grad(
    const ElementCache& cache,
    const std::function<double(int, const Vec2&)>& weight, int qdeg = 6) {
  const TriangleRule& rule = triangle_rule(qdeg);
  return detail::assemble_matrix(cache, [&](int t, Matrix6d& K) {
    const auto c = cache.mesh().corners(t);
    const double area = cache.mesh().triangle(t).area;
    K.setZero();
    std::array<Vec2, 6> g;
    for (const QuadPoint& q : rule.points) {
      const Vec2 x = map_to_triangle(c, q);
      const double w = area * q.w * weight(t, x);
      for (int s = 0; s < 6; ++s) g[s] = cache[t].shape_grad(s, x);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) K(i, j) += w * g[i].dot(g[j]);
    }
  });
}

// Broken stiffness (grad u, grad v)_h.
inline SpMat assemble_broken_grad(const ElementCache& cache) {
  return assemble_weighted_grad(
      cache, [](int, const Vec2&) { return 1.0; }, 2);
}

// N(u)_i = (f'(u) grad u, grad phi_i)_h, the Gateaux term of the well.
inline Eigen::VectorXd nonlinear_term(const ElementCache& cache,
                                      const Eigen::VectorXd& u, int qdeg = 6) {
  const Mesh& mesh = cache.mesh();
  const TriangleRule& rule = triangle_rule(qdeg);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.n_dofs());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const double area = mesh.triangle(t).area;
    const LocalPoly up = cache.local_poly(t, u);
    const auto dofs = cache.global_dofs(t);
    for (const QuadPoint& q : rule.points) {
      const Vec2 x = map_to_triangle(c, q);
      const Vec2 flux = (area * q.w * DoubleWell::fp(up.value(x))) * up.grad(x);
      for (int i = 0; i < 6; ++i)
        out[dofs[i]] += flux.dot(cache[t].shape_grad(i, x));
    }
  }
  return out;
}

// Jacobian of N: J(u)_{ij} = (f''(u) phi_j grad u + f'(u) grad phi_j,
// grad phi_i)_h.  Nonsymmetric.
inline SpMat nonlinear_jacobian(const ElementCache& cache,
                                const Eigen::VectorXd& u, int qdeg = 6) {
  const TriangleRule& rule = triangle_rule(qdeg);
  return detail::assemble_matrix(cache, [&](int t, Matrix6d& K) {
    const auto c = cache.mesh().corners(t);
    const double area = cache.mesh().triangle(t).area;
    const LocalPoly up = cache.local_poly(t, u);
    K.setZero();
    std::array<Vec2, 6> g;
    Vector6d v;
    for (const QuadPoint& q : rule.points) {
      const Vec2 x = map_to_triangle(c, q);
      const double uv = up.value(x);
      const Vec2 ug = up.grad(x);
      for (int s = 0; s < 6; ++s) {
        g[s] = cache[t].shape_grad(s, x);
        v[s] = cache[t].shape_value(s, x);
      }
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          K(i, j) += area * q.w *
                     (DoubleWell::fpp(uv) * v[j] * ug +
                      DoubleWell::fp(uv) * g[j])
                         .dot(g[i]);
    }
  });
}

// (f, phi_i)_h for an analytic density f.
inline Eigen::VectorXd l2_functional(const ElementCache& cache,
                                     const std::function<double(const Vec2&)>& f,
                                     int qdeg = 8) {
  const Mesh& mesh = cache.mesh();
  const TriangleRule& rule = triangle_rule(qdeg);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.n_dofs());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const double area = mesh.triangle(t).area;
    const auto dofs = cache.global_dofs(t);
    for (const QuadPoint& q : rule.points) {
      const Vec2 x = map_to_triangle(c, q);
      const double w = area * q.w * f(x);
      for (int i = 0; i < 6; ++i) out[dofs[i]] += w * cache[t].shape_value(i, x);
    }
  }
  return out;
}

// int_Omega of a discrete field (exact: quadratics under a degree-4 rule).
inline double field_integral(const ElementCache& cache,
                             const Eigen::VectorXd& u) {
  const Mesh& mesh = cache.mesh();
  const TriangleRule& rule = triangle_rule(4);
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const LocalPoly up = cache.local_poly(t, u);
    double s = 0.0;
    for (const QuadPoint& q : rule.points) s += q.w * up.value(map_to_triangle(c, q));
    total += mesh.triangle(t).area * s;
  }
  return total;
}

// J_eps(u) = (eps/2) |u|_{1,h}^2 + (1/(4 eps)) ||u^2 - 1||^2.
inline double discrete_energy(const ElementCache& cache,
                              const Eigen::VectorXd& u, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("discrete_energy: eps must be positive");
  const Mesh& mesh = cache.mesh();
  const TriangleRule& rule = triangle_rule(8);
  double grad2 = 0.0, well = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const double area = mesh.triangle(t).area;
    const LocalPoly up = cache.local_poly(t, u);
    for (const QuadPoint& q : rule.points) {
      const Vec2 x = map_to_triangle(c, q);
      grad2 += area * q.w * up.grad(x).squaredNorm();
      well += area * q.w * DoubleWell::F(up.value(x));
    }
  }
  return 0.5 * eps * grad2 + well / eps;
}

// B_h(w, phi_i) = sum_T int_{dT} [Lap(w) dphi/dn + w_ns dphi/ds / 2
//                                 - w_ss dphi/dn / 2] for smooth w.
// n is the element-outward normal and s the counterclockwise tangent.
inline Eigen::VectorXd bh_functional(const ElementCache& cache,
                                     const ScalarFunction& w) {
  if (!w.has_hess())
    throw std::invalid_argument("bh_functional: hessian data required");
  const Mesh& mesh = cache.mesh();
  const auto seg = gauss_segment(3);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.n_dofs());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const auto dofs = cache.global_dofs(t);
    for (int le = 0; le < 3; ++le) {
      const Edge& e = mesh.edge(tri.e[le]);
      const Vec2 n = tri.sign[le] * e.normal;
      const Vec2 s(-n.y(), n.x());
      const Vec2 a = mesh.vertex(e.v[0]);
      const Vec2 b = mesh.vertex(e.v[1]);
      for (const SegPoint& gp : seg) {
        const Vec2 x = a + gp.t * (b - a);
        const Eigen::Matrix2d H = w.hess(x);
        const double lap = H.trace();
        const double wns = n.dot(H * s);
        const double wss = s.dot(H * s);
        for (int i = 0; i < 6; ++i) {
          const Vec2 g = cache[t].shape_grad(i, x);
          out[dofs[i]] += e.length * gp.w *
                          (lap * g.dot(n) + 0.5 * wns * g.dot(s) -
                           0.5 * wss * g.dot(n));
        }
      }
    }
  }
  return out;
}

// Index map dropping the essential DOFs (normal derivatives on boundary
// edges), i.e. the subspace the evolution runs in.
class DofMask {
 public:
  static DofMask essential(const Mesh& mesh) {
    DofMask m;
    m.red_of_full_.assign(mesh.n_dofs(), -1);
    for (int v = 0; v < mesh.n_vertices(); ++v) m.keep(v);
    for (int e = 0; e < mesh.n_edges(); ++e)
      if (!mesh.edge(e).boundary) m.keep(mesh.edge_dof(e));
    return m;
  }

  int full_size() const { return static_cast<int>(red_of_full_.size()); }
  int reduced_size() const { return static_cast<int>(full_of_red_.size()); }

  SpMat reduce(const SpMat& A) const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(A.nonZeros()));
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        const int i = red_of_full_[it.row()];
        const int j = red_of_full_[it.col()];
        if (i >= 0 && j >= 0) trips.emplace_back(i, j, it.value());
      }
    SpMat R(reduced_size(), reduced_size());
    R.setFromTriplets(trips.begin(), trips.end());
    return R;
  }

  Eigen::VectorXd reduce(const Eigen::VectorXd& v) const {
    Eigen::VectorXd r(reduced_size());
    for (int i = 0; i < reduced_size(); ++i) r[i] = v[full_of_red_[i]];
    return r;
  }

  Eigen::VectorXd expand(const Eigen::VectorXd& r) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(full_size());
    for (int i = 0; i < reduced_size(); ++i) v[full_of_red_[i]] = r[i];
    return v;
  }

 private:
  void keep(int dof) {
    red_of_full_[dof] = static_cast<int>(full_of_red_.size());
    full_of_red_.push_back(dof);
  }

  std::vector<int> red_of_full_;
  std::vector<int> full_of_red_;
};

// Weighted elliptic projection: find p in the reduced Morley space with
//   eps a_h(p, v) + (1/eps)(f'(u) grad p, grad v)_h + alpha (p, v)_h
//     = (eps Lap^2 u - (1/eps)(f''(u)|grad u|^2 + f'(u) Lap u) + alpha u, v)_h.
// alpha < 0 requests the default max(1, eps^-3).
inline Eigen::VectorXd elliptic_projection(const ElementCache& cache,
                                           const ScalarFunction& u, double eps,
                                           double alpha = -1.0) {
  if (!(eps > 0.0))
    throw std::invalid_argument("elliptic_projection: eps must be positive");
  if (!u.has_grad() || !u.has_hess() || !u.has_bilap())
    throw std::invalid_argument("elliptic_projection: derivative data required");
  if (alpha < 0.0) alpha = std::max(1.0, 1.0 / (eps * eps * eps));

  const SpMat A = assemble_a_h(cache);
  const SpMat M = assemble_mass(cache);
  const SpMat W = assemble_weighted_grad(
      cache, [&](int, const Vec2& x) { return DoubleWell::fp(u.value(x)); }, 8);
  SpMat B = eps * A + (1.0 / eps) * W + alpha * M;

  const Eigen::VectorXd rhs = l2_functional(
      cache,
      [&](const Vec2& x) {
        const double uv = u.value(x);
        const Vec2 g = u.grad(x);
        return eps * u.bilap(x) -
               (DoubleWell::fpp(uv) * g.squaredNorm() +
                DoubleWell::fp(uv) * u.laplacian(x)) /
                   eps +
               alpha * uv;
      },
      8);

  const DofMask mask = DofMask::essential(cache.mesh());
  SpMat Br = mask.reduce(B);
  Br.makeCompressed();
  Eigen::SparseLU<SpMat> lu(Br);
  if (lu.info() != Eigen::Success)
    throw SolverError("elliptic_projection: factorization failed");
  const Eigen::VectorXd rr = mask.reduce(rhs);
  const Eigen::VectorXd xr = lu.solve(rr);
  if (!((Br * xr - rr).norm() <= 1e-8 * (1.0 + rr.norm())))
    throw SolverError("elliptic_projection: linear residual too large");
  return mask.expand(xr);
}

}  // namespace morley
