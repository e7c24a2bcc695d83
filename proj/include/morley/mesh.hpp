#pragma once

// Criss-cross triangulations of an axis-aligned rectangle, plus the entity
// tables (edges with a fixed global normal, triangle/edge incidence) that the
// Morley degrees of freedom are built on.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "morley/errors.hpp"

namespace morley {

using Vec2 = Eigen::Vector2d;

struct Rect {
  double x0 = -1.0, y0 = -1.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

struct Edge {
  int v[2];      // endpoint vertex ids, v[0] < v[1]
  int tri[2];    // incident triangles, tri[1] == -1 on the boundary
  Vec2 normal;   // unit normal: direction v[0]->v[1] rotated by +90 degrees
  Vec2 midpoint;
  double length;
  bool boundary;
};

struct Triangle {
  int v[3];        // vertex ids, counterclockwise
  int e[3];        // edge ids, e[i] opposite v[i]
  double sign[3];  // +1 if edge normal points out of this triangle, else -1
  double area;
};

// Conforming triangulation with the global-normal convention baked in.  The
// Morley DOF layout is: one value DOF per vertex (ids [0, n_vertices)) followed
// by one normal-derivative DOF per edge (ids [n_vertices, n_vertices+n_edges)).
class Mesh {
 public:
  // Splits each of the n x n grid squares into four triangles by both
  // diagonals (one extra vertex per square center).
  static Mesh crisscross(int n, const Rect& box = Rect{});

  int n_vertices() const { return static_cast<int>(verts_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  int n_triangles() const { return static_cast<int>(tris_.size()); }
  int n_dofs() const { return n_vertices() + n_edges(); }

  const Vec2& vertex(int i) const { return verts_[i]; }
  const Edge& edge(int i) const { return edges_[i]; }
  const Triangle& triangle(int i) const { return tris_[i]; }

  int edge_dof(int e) const { return n_vertices() + e; }

  // Triangles incident to a vertex (used for gradient averaging).
  const std::vector<int>& vertex_triangles(int v) const { return vert_tris_[v]; }

  int n_boundary_edges() const { return n_boundary_edges_; }
  int n() const { return n_; }
  double grid_h() const { return h_; }
  const Rect& box() const { return box_; }
  int grid_n() const { return n_; }

  // Local vertex coordinates of a triangle, handy for quadrature mapping.
  std::array<Vec2, 3> corners(int t) const {
    const Triangle& tri = tris_[t];
    return {verts_[tri.v[0]], verts_[tri.v[1]], verts_[tri.v[2]]};
  }

  // Plain-text listing of entities for debugging.
  void dump(std::ostream& os) const;

 private:
  Rect box_;
  int n_ = 0;
  double h_ = 0.0;
  int n_boundary_edges_ = 0;
  std::vector<Vec2> verts_;
  std::vector<Edge> edges_;
  std::vector<Triangle> tris_;
  std::vector<std::vector<int>> vert_tris_;
};

inline Mesh Mesh::crisscross(int n, const Rect& box) {
  if (n < 1) throw std::invalid_argument("crisscross: n must be >= 1");
  if (!(box.x1 > box.x0) || !(box.y1 > box.y0))
    throw GeometryError("crisscross: rectangle has non-positive extent");

  Mesh m;
  m.box_ = box;
  m.n_ = n;
  m.h_ = box.width() / n;

  const double hx = box.width() / n;
  const double hy = box.height() / n;

  // Grid vertices first, then square centers.
  m.verts_.reserve((n + 1) * (n + 1) + n * n);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      m.verts_.emplace_back(box.x0 + i * hx, box.y0 + j * hy);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      m.verts_.emplace_back(box.x0 + (i + 0.5) * hx, box.y0 + (j + 0.5) * hy);

  auto grid_id = [n](int i, int j) { return j * (n + 1) + i; };
  auto center_id = [n](int i, int j) { return (n + 1) * (n + 1) + j * n + i; };

  m.tris_.reserve(4 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = grid_id(i, j);
      const int b = grid_id(i + 1, j);
      const int c = grid_id(i + 1, j + 1);
      const int d = grid_id(i, j + 1);
      const int mid = center_id(i, j);
      for (auto [p, q] : {std::pair{a, b}, {b, c}, {c, d}, {d, a}}) {
        Triangle t{};
        t.v[0] = p;
        t.v[1] = q;
        t.v[2] = mid;
        m.tris_.push_back(t);
      }
    }
  }

  // Edge table: first hit of each vertex pair assigns the id.
  std::map<std::pair<int, int>, int> edge_ids;
  for (int ti = 0; ti < m.n_triangles(); ++ti) {
    Triangle& t = m.tris_[ti];
    const Vec2& p0 = m.verts_[t.v[0]];
    const Vec2& p1 = m.verts_[t.v[1]];
    const Vec2& p2 = m.verts_[t.v[2]];
    t.area = 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                    (p2.x() - p0.x()) * (p1.y() - p0.y()));
    if (!(t.area > 0.0))
      throw GeometryError("crisscross: non-positive triangle area");

    for (int le = 0; le < 3; ++le) {
      // Local edge le joins the two vertices opposite to v[le].
      const int va = t.v[(le + 1) % 3];
      const int vb = t.v[(le + 2) % 3];
      const std::pair<int, int> key{std::min(va, vb), std::max(va, vb)};
      auto it = edge_ids.find(key);
      int ei;
      if (it == edge_ids.end()) {
        ei = static_cast<int>(m.edges_.size());
        edge_ids.emplace(key, ei);
        Edge e{};
        e.v[0] = key.first;
        e.v[1] = key.second;
        e.tri[0] = ti;
        e.tri[1] = -1;
        const Vec2 d = m.verts_[key.second] - m.verts_[key.first];
        e.length = d.norm();
        const Vec2 t_unit = d / e.length;
        e.normal = Vec2(-t_unit.y(), t_unit.x());
        e.midpoint = 0.5 * (m.verts_[key.first] + m.verts_[key.second]);
        e.boundary = true;  // downgraded below when a second triangle shows up
        m.edges_.push_back(e);
      } else {
        ei = it->second;
        Edge& e = m.edges_[ei];
        if (e.tri[1] != -1)
          throw GeometryError("crisscross: edge with more than two triangles");
        e.tri[1] = ti;
        e.boundary = false;
      }
      t.e[le] = ei;

      // Outward normal along the counterclockwise traversal va -> vb.
      const Vec2 tangent = (m.verts_[vb] - m.verts_[va]).normalized();
      const Vec2 outward(tangent.y(), -tangent.x());
      t.sign[le] = outward.dot(m.edges_[ei].normal) > 0.0 ? 1.0 : -1.0;
    }
  }

  for (const Edge& e : m.edges_)
    if (e.boundary) ++m.n_boundary_edges_;

  m.vert_tris_.resize(m.verts_.size());
  for (int ti = 0; ti < m.n_triangles(); ++ti)
    for (int k = 0; k < 3; ++k) m.vert_tris_[m.tris_[ti].v[k]].push_back(ti);

  return m;
}

inline void Mesh::dump(std::ostream& os) const {
  os << "mesh n=" << n_ << " vertices=" << n_vertices() << " edges=" << n_edges()
     << " triangles=" << n_triangles() << " dofs=" << n_dofs() << "\n";
  for (int i = 0; i < n_vertices(); ++i)
    os << "v " << i << " " << verts_[i].x() << " " << verts_[i].y() << "\n";
  for (int i = 0; i < n_edges(); ++i) {
    const Edge& e = edges_[i];
    os << "e " << i << " " << e.v[0] << " " << e.v[1] << " n=(" << e.normal.x()
       << "," << e.normal.y() << ")" << (e.boundary ? " boundary" : "") << "\n";
  }
  for (int i = 0; i < n_triangles(); ++i) {
    const Triangle& t = tris_[i];
    os << "t " << i << " v=(" << t.v[0] << "," << t.v[1] << "," << t.v[2]
       << ") e=(" << t.e[0] << "," << t.e[1] << "," << t.e[2] << ") s=("
       << t.sign[0] << "," << t.sign[1] << "," << t.sign[2] << ")\n";
  }
}

}  // namespace morley
