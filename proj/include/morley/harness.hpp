#pragma once

// Convergence studies in the scheme's norms, zero-level-set extraction, and
// the report container the CLI serialises.

#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "morley/dynamics.hpp"
#include "morley/invlap.hpp"

namespace morley {

// Least-squares slope of log(err) against log(scale).
inline double fitted_order(const std::vector<double>& scales,
                           const std::vector<double>& errs) {
  if (scales.size() != errs.size() || scales.size() < 2)
    throw std::invalid_argument("fitted_order: need >= 2 matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(scales.size());
  for (int i = 0; i < n; ++i) {
    const double x = std::log(scales[i]);
    const double y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ConvergenceReport {
  std::string study;
  std::vector<std::string> columns;
  std::vector<double> scales;              // h or k, strictly decreasing
  std::vector<std::vector<double>> rows;   // one row of errors per scale
  std::vector<double> orders;              // fitted per column

  void fit() {
    orders.assign(columns.size(), 0.0);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      std::vector<double> e;
      for (const auto& r : rows) e.push_back(r[c]);
      orders[c] = fitted_order(scales, e);
    }
  }

  double order(const std::string& column) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (columns[c] == column) return orders[c];
    throw std::invalid_argument("no such report column: " + column);
  }
};

// |f - I_h f|_{j,2,h} for j = 0, 1, 2.
inline ConvergenceReport interpolation_study(const ScalarFunction& f,
                                             const std::vector<int>& ns) {
  ConvergenceReport rep;
  rep.study = "interpolation";
  rep.columns = {"l2", "h1", "h2"};
  for (int n : ns) {
    const Mesh mesh = Mesh::crisscross(n);
    const ElementCache cache(mesh);
    const Eigen::VectorXd v = interpolate(mesh, f);
    const auto diff = difference(MorleyEval{&cache, &v}, AnalyticEval{&f});
    rep.scales.push_back(mesh.grid_h());
    rep.rows.push_back({broken_seminorm(mesh, diff, 0),
                        broken_seminorm(mesh, diff, 1),
                        broken_seminorm(mesh, diff, 2)});
  }
  rep.fit();
  return rep;
}

// |E v - v|_{j,2,h} for v = I_h f and j = 0, 1.
inline ConvergenceReport enrichment_study(const ScalarFunction& f,
                                          const std::vector<int>& ns) {
  ConvergenceReport rep;
  rep.study = "enrichment";
  rep.columns = {"l2", "h1"};
  for (int n : ns) {
    const Mesh mesh = Mesh::crisscross(n);
    const ElementCache cache(mesh);
    const HctSpace space(mesh);
    const Eigen::VectorXd v = interpolate(mesh, f);
    const HctField ev = enrich_to_hct(cache, v);
    const auto diff = difference(HctEval{&space, &ev}, MorleyEval{&cache, &v});
    rep.scales.push_back(mesh.grid_h());
    rep.rows.push_back({broken_seminorm(mesh, diff, 0),
                        broken_seminorm(mesh, diff, 1)});
  }
  rep.fit();
  return rep;
}

// ||P_h u - u||_{j,2,h} for j = 0 and 2.
inline ConvergenceReport projection_study(const ScalarFunction& u, double eps,
                                          const std::vector<int>& ns,
                                          double alpha = -1.0) {
  ConvergenceReport rep;
  rep.study = "projection";
  rep.columns = {"l2", "h2"};
  for (int n : ns) {
    const Mesh mesh = Mesh::crisscross(n);
    const ElementCache cache(mesh);
    const Eigen::VectorXd p = elliptic_projection(cache, u, eps, alpha);
    const auto diff = difference(MorleyEval{&cache, &p}, AnalyticEval{&u});
    rep.scales.push_back(mesh.grid_h());
    rep.rows.push_back(
        {broken_norm(mesh, diff, 0), broken_norm(mesh, diff, 2)});
  }
  rep.fit();
  return rep;
}

// A family u*(., t) with the source that makes it solve the forced equation.
struct ManufacturedProblem {
  std::function<ScalarFunction(double)> state;
  std::function<double(double, const Vec2&)> source;
};

inline ManufacturedProblem manufactured_problem(double eps) {
  return {[](double t) { return manufactured_state(t); },
          [eps](double t, const Vec2& p) {
            return manufactured_source(t, eps)(p);
          }};
}

namespace detail {

inline Eigen::VectorXd drive_to_time(const ElementCache& cache,
                                     const ManufacturedProblem& prob,
                                     double eps, double k, double T,
                                     double alpha = -1.0) {
  SimConfig cfg;
  cfg.epsilon = eps;
  cfg.dt = k;
  cfg.t_final = T;
  cfg.n = cache.mesh().n();
  Eigen::VectorXd u = elliptic_projection(cache, prob.state(0.0), eps, alpha);
  Stepper stepper(cache, cfg, prob.source);
  const int nsteps = static_cast<int>(std::ceil(T / k - 1e-12));
  for (int s = 1; s <= nsteps; ++s) u = stepper.step(u, k, s * k, s);
  return u;
}

}  // namespace detail

// Fixed small k, n swept: errors at the final time against both the elliptic
// projection of u* (the quantity the error analysis controls) and u* itself.
inline ConvergenceReport space_convergence(const ManufacturedProblem& prob,
                                           double eps,
                                           const std::vector<int>& ns,
                                           double k, double T,
                                           int refine = 2) {
  ConvergenceReport rep;
  rep.study = "space";
  rep.columns = {"hm1_theta", "l2_theta", "h2_theta", "l2_exact", "h2_exact"};
  for (int n : ns) {
    const Mesh mesh = Mesh::crisscross(n);
    const ElementCache cache(mesh);
    const Eigen::VectorXd u = detail::drive_to_time(cache, prob, eps, k, T);
    const ScalarFunction uT = prob.state(T);
    const Eigen::VectorXd theta =
        (elliptic_projection(cache, uT, eps) - u).eval();
    const PoissonOracle oracle(mesh, refine);
    const auto theta_eval = MorleyEval{&cache, &theta};
    const auto exact_diff = difference(MorleyEval{&cache, &u}, AnalyticEval{&uT});
    rep.scales.push_back(mesh.grid_h());
    rep.rows.push_back(
        {h_minus1_norm(oracle, cache, de_mean(cache, theta)),
         broken_norm(mesh, theta_eval, 0), broken_norm(mesh, theta_eval, 2),
         broken_norm(mesh, exact_diff, 0), broken_norm(mesh, exact_diff, 2)});
  }
  rep.fit();
  return rep;
}

// Fixed n, k swept.  On one mesh the spatial error is identical across the
// runs, so differences against a much finer-k reference isolate the time
// error; the theta columns keep the projection-based view for context.
inline ConvergenceReport time_convergence(const ManufacturedProblem& prob,
                                          double eps, int n,
                                          const std::vector<double>& ks,
                                          double T, int refine = 2) {
  ConvergenceReport rep;
  rep.study = "time";
  rep.columns = {"hm1_self", "l2_self", "hm1_theta", "l2_theta"};
  const Mesh mesh = Mesh::crisscross(n);
  const ElementCache cache(mesh);
  const PoissonOracle oracle(mesh, refine);

  double kref = ks.front();
  for (double k : ks) kref = std::min(kref, k);
  kref /= 4.0;
  const Eigen::VectorXd ref = detail::drive_to_time(cache, prob, eps, kref, T);

  const ScalarFunction uT = prob.state(T);
  const Eigen::VectorXd proj = elliptic_projection(cache, uT, eps);
  for (double k : ks) {
    const Eigen::VectorXd u = detail::drive_to_time(cache, prob, eps, k, T);
    const Eigen::VectorXd self = (u - ref).eval();
    const Eigen::VectorXd theta = (proj - u).eval();
    rep.scales.push_back(k);
    rep.rows.push_back(
        {h_minus1_norm(oracle, cache, de_mean(cache, self)),
         broken_norm(mesh, MorleyEval{&cache, &self}, 0),
         h_minus1_norm(oracle, cache, de_mean(cache, theta)),
         broken_norm(mesh, MorleyEval{&cache, &theta}, 0)});
  }
  rep.fit();
  return rep;
}

// ---------------------------------------------------------------------------
// Zero level set by marching triangles on the vertex values (every triangle
// corner is a mesh vertex, squares' centers included).

struct ContourSet {
  std::vector<std::vector<Vec2>> polylines;  // closed loops repeat the start
};

namespace detail {

struct CrossSeg {
  long long key[2];  // node keys: 2*vertex_id for vertex hits, 2*edge_id+1
  Vec2 p[2];
};

// Crossing point on the edge between global vertices a and b, computed in
// (min, max) vertex order so both neighbouring triangles agree bit for bit.
inline std::pair<long long, Vec2> edge_crossing(const Mesh& mesh, int a, int b,
                                                int edge_id, double ua,
                                                double ub) {
  if (a > b) {
    std::swap(a, b);
    std::swap(ua, ub);
  }
  const double t = ua / (ua - ub);
  if (t <= 1e-12) return {2LL * a, mesh.vertex(a)};
  if (t >= 1.0 - 1e-12) return {2LL * b, mesh.vertex(b)};
  const Vec2 p = mesh.vertex(a) + t * (mesh.vertex(b) - mesh.vertex(a));
  return {2LL * edge_id + 1, p};
}

}  // namespace detail

inline ContourSet extract_zero_level_set(const Mesh& mesh,
                                         const Eigen::VectorXd& u) {
  std::vector<detail::CrossSeg> segs;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    bool pos[3];
    for (int i = 0; i < 3; ++i) pos[i] = u[tri.v[i]] >= 0.0;
    if (pos[0] == pos[1] && pos[1] == pos[2]) continue;
    detail::CrossSeg seg;
    int found = 0;
    for (int i = 0; i < 3; ++i) {  // local edge i joins corners i+1, i+2
      const int a = tri.v[(i + 1) % 3], b = tri.v[(i + 2) % 3];
      if ((u[a] >= 0.0) == (u[b] >= 0.0)) continue;
      const auto [key, p] =
          detail::edge_crossing(mesh, a, b, tri.e[i], u[a], u[b]);
      seg.key[found] = key;
      seg.p[found] = p;
      ++found;
    }
    if (found == 2 && seg.key[0] != seg.key[1]) segs.push_back(seg);
  }

  // Chain segments that share a node key; open chains first, then loops.
  std::unordered_multimap<long long, int> at_node;
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    at_node.emplace(segs[s].key[0], s);
    at_node.emplace(segs[s].key[1], s);
  }
  std::vector<bool> used(segs.size(), false);
  ContourSet out;

  auto walk = [&](int start, int end_idx) {
    std::vector<Vec2> line{segs[start].p[1 - end_idx],
                           segs[start].p[end_idx]};
    used[start] = true;
    long long node = segs[start].key[end_idx];
    for (;;) {
      int next = -1;
      auto [lo, hi] = at_node.equal_range(node);
      for (auto it = lo; it != hi; ++it)
        if (!used[it->second]) {
          next = it->second;
          break;
        }
      if (next < 0) break;
      used[next] = true;
      const int leave = segs[next].key[0] == node ? 1 : 0;
      line.push_back(segs[next].p[leave]);
      node = segs[next].key[leave];
    }
    out.polylines.push_back(std::move(line));
  };

  auto degree = [&](long long key) {
    int d = 0;
    auto [lo, hi] = at_node.equal_range(key);
    for (auto it = lo; it != hi; ++it)
      if (!used[it->second]) ++d;
    return d;
  };

  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    if (used[s]) continue;
    if (degree(segs[s].key[0]) == 1)
      walk(s, 1);
    else if (degree(segs[s].key[1]) == 1)
      walk(s, 0);
  }
  for (int s = 0; s < static_cast<int>(segs.size()); ++s)
    if (!used[s]) walk(s, 1);  // remaining segments sit on closed loops
  return out;
}

}  // namespace morley
