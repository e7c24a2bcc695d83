#pragma once

// Quadrature on the reference triangle (barycentric points, weights summing
// to one) and Gauss rules on the unit segment.  Triangle rules are exact for
// polynomials up to their declared degree and have strictly positive weights
// with points inside the triangle.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "morley/mesh.hpp"

namespace morley {

struct QuadPoint {
  double b0, b1, b2;  // barycentric coordinates
  double w;           // weight; rule weights sum to 1
};

struct TriangleRule {
  int degree;  // highest total polynomial degree integrated exactly
  std::vector<QuadPoint> points;
};

struct SegPoint {
  double t;  // position in [0, 1]
  double w;  // weights sum to 1
};

// Gauss-Legendre nodes on [0,1] (n points, exact through degree 2n-1).
inline std::vector<SegPoint> gauss_segment(int n) {
  if (n < 1) throw std::invalid_argument("gauss_segment: n must be >= 1");
  std::vector<SegPoint> pts(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    pts[i].t = 0.5 * (1.0 - x);  // descending roots -> ascending t
    pts[i].w = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return pts;
}

namespace detail {

inline void push_orbit1(std::vector<QuadPoint>& pts, double w) {
  pts.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, w});
}

// Three permutations of (a, b, b) with b = (1-a)/2.
inline void push_orbit3(std::vector<QuadPoint>& pts, double a, double w) {
  const double b = 0.5 * (1.0 - a);
  pts.push_back({a, b, b, w});
  pts.push_back({b, a, b, w});
  pts.push_back({b, b, a, w});
}

// All six permutations of (a, b, c) with c = 1-a-b.
inline void push_orbit6(std::vector<QuadPoint>& pts, double a, double b, double w) {
  const double c = 1.0 - a - b;
  pts.push_back({a, b, c, w});
  pts.push_back({a, c, b, w});
  pts.push_back({b, a, c, w});
  pts.push_back({b, c, a, w});
  pts.push_back({c, a, b, w});
  pts.push_back({c, b, a, w});
}

inline TriangleRule make_dunavant(int degree) {
  TriangleRule r;
  r.degree = degree;
  switch (degree) {
    case 1:
      push_orbit1(r.points, 1.0);
      break;
    case 2:
      push_orbit3(r.points, 2.0 / 3.0, 1.0 / 3.0);
      break;
    case 4:
      push_orbit3(r.points, 0.108103018168070, 0.223381589678011);
      push_orbit3(r.points, 0.816847572980459, 0.109951743655322);
      break;
    case 5:
      push_orbit1(r.points, 0.225);
      push_orbit3(r.points, 0.059715871789770, 0.132394152788506);
      push_orbit3(r.points, 0.797426985353087, 0.125939180544827);
      break;
    case 6:
      push_orbit3(r.points, 0.501426509658179, 0.116786275726379);
      push_orbit3(r.points, 0.873821971016996, 0.050844906370207);
      push_orbit6(r.points, 0.053145049844817, 0.310352451033784,
                  0.082851075618374);
      break;
    case 8:
      push_orbit1(r.points, 0.14431560767771762);
      push_orbit3(r.points, 0.081414823414646356, 0.095091634267329084);
      push_orbit3(r.points, 0.65886138449658538, 0.10321737053473318);
      push_orbit3(r.points, 0.89890554336593276, 0.032458497623205365);
      push_orbit6(r.points, 0.0083947774098813502, 0.26311282963480093,
                  0.027230314174413305);
      break;
    default:
      throw std::invalid_argument("make_dunavant: no table for this degree");
  }
  return r;
}

// Collapsed-square (Duffy) product of two m-point Gauss-Legendre rules,
// exact for total degree <= 2m-2.
inline TriangleRule make_duffy(int m, int declared_degree) {
  TriangleRule r;
  r.degree = declared_degree;
  const auto gl = gauss_segment(m);
  for (const SegPoint& gx : gl) {
    for (const SegPoint& gy : gl) {
      const double x = gx.t * (1.0 - gy.t);
      const double y = gy.t;
      r.points.push_back({1.0 - x - y, x, y, 2.0 * gx.w * gy.w * (1.0 - gy.t)});
    }
  }
  return r;
}

}  // namespace detail

// Rule exact at least through the requested degree.  Degrees 3 and 7 are
// served by the next Dunavant table with positive weights (4 and 8); degrees
// 9 and 10 by a 36-point Duffy rule.
inline const TriangleRule& triangle_rule(int degree) {
  if (degree < 1 || degree > 10)
    throw std::invalid_argument("triangle_rule: degree must be in [1, 10]");
  static const std::array<TriangleRule, 10> rules = [] {
    std::array<TriangleRule, 10> r;
    r[0] = detail::make_dunavant(1);
    r[1] = detail::make_dunavant(2);
    r[2] = detail::make_dunavant(4);
    r[3] = detail::make_dunavant(4);
    r[4] = detail::make_dunavant(5);
    r[5] = detail::make_dunavant(6);
    r[6] = detail::make_dunavant(8);
    r[7] = detail::make_dunavant(8);
    r[8] = detail::make_duffy(6, 9);
    r[9] = detail::make_duffy(6, 10);
    return r;
  }();
  return rules[degree - 1];
}

inline Vec2 map_to_triangle(const std::array<Vec2, 3>& c, const QuadPoint& q) {
  return q.b0 * c[0] + q.b1 * c[1] + q.b2 * c[2];
}

}  // namespace morley
