#pragma once

// Analytic scalar fields with optional derivative data: initial conditions,
// eigenfunctions used by the operator tests, and the manufactured solution.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "morley/mesh.hpp"

namespace morley {

struct ScalarFunction {
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> grad;             // optional
  std::function<Eigen::Matrix2d(Vec2)> hess;  // optional
  std::function<double(Vec2)> bilap;          // optional

  bool has_grad() const { return static_cast<bool>(grad); }
  bool has_hess() const { return static_cast<bool>(hess); }
  bool has_bilap() const { return static_cast<bool>(bilap); }

  double laplacian(const Vec2& p) const { return hess(p).trace(); }
};

inline ScalarFunction constant_function(double c) {
  ScalarFunction f;
  f.value = [c](Vec2) { return c; };
  f.grad = [](Vec2) { return Vec2::Zero().eval(); };
  f.hess = [](Vec2) { return Eigen::Matrix2d::Zero().eval(); };
  f.bilap = [](Vec2) { return 0.0; };
  return f;
}

namespace detail {

// tanh((r - r0) / (sqrt(2) eps)) with radial derivatives up to fourth order.
struct TanhProfile {
  double r0, inv;  // inv = 1 / (sqrt(2) eps)

  double psi(double r) const { return std::tanh((r - r0) * inv); }
  // d^k/dr^k via the tanh chain: tau' = 1 - tau^2.
  void derivs(double r, double& p1, double& p2, double& p3, double& p4) const {
    const double tau = psi(r);
    const double sech2 = 1.0 - tau * tau;
    p1 = inv * sech2;
    p2 = inv * inv * (-2.0 * tau * sech2);
    p3 = inv * inv * inv * (6.0 * tau * tau - 2.0) * sech2;
    p4 = inv * inv * inv * inv * (16.0 - 24.0 * tau * tau) * tau * sech2;
  }
};

struct RadialField {
  Vec2 center;
  TanhProfile prof;

  double value(Vec2 p) const { return prof.psi((p - center).norm()); }
  Vec2 grad(Vec2 p) const {
    const Vec2 d = p - center;
    const double r = d.norm();
    if (r < 1e-12) return Vec2::Zero();
    double p1, p2, p3, p4;
    prof.derivs(r, p1, p2, p3, p4);
    return (p1 / r) * d;
  }
  Eigen::Matrix2d hess(Vec2 p) const {
    const Vec2 d = p - center;
    const double r = d.norm();
    double p1, p2, p3, p4;
    if (r < 1e-12) {
      prof.derivs(1e-12, p1, p2, p3, p4);
      return p2 * Eigen::Matrix2d::Identity();
    }
    prof.derivs(r, p1, p2, p3, p4);
    const Vec2 rh = d / r;
    const Eigen::Matrix2d proj = rh * rh.transpose();
    return p2 * proj + (p1 / r) * (Eigen::Matrix2d::Identity() - proj);
  }
  double bilap(Vec2 p) const {
    const double r = std::max((p - center).norm(), 1e-12);
    double p1, p2, p3, p4;
    prof.derivs(r, p1, p2, p3, p4);
    return p4 + 2.0 * p3 / r - p2 / (r * r) + p1 / (r * r * r);
  }
};

}  // namespace detail

// tanh(d0 / (sqrt(2) eps)) with d0 the signed distance to a circle.
inline ScalarFunction circle_tanh(double eps, Vec2 center = Vec2(0.0, 0.0),
                                  double radius = 0.5) {
  if (eps <= 0.0) throw std::invalid_argument("circle_tanh: eps must be > 0");
  const detail::RadialField rf{center, {radius, 1.0 / (std::sqrt(2.0) * eps)}};
  ScalarFunction f;
  f.value = [rf](Vec2 p) { return rf.value(p); };
  f.grad = [rf](Vec2 p) { return rf.grad(p); };
  f.hess = [rf](Vec2 p) { return rf.hess(p); };
  f.bilap = [rf](Vec2 p) { return rf.bilap(p); };
  return f;
}

// tanh(min(d1, d2) / (sqrt(2) eps)) for two circles; derivative data comes
// from whichever circle is closer (the min is smooth away from the ridge).
inline ScalarFunction two_circles_tanh(double eps) {
  if (eps <= 0.0)
    throw std::invalid_argument("two_circles_tanh: eps must be > 0");
  const double inv = 1.0 / (std::sqrt(2.0) * eps);
  const detail::RadialField a{Vec2(-0.3, 0.0), {0.3, inv}};
  const detail::RadialField b{Vec2(0.3, 0.0), {0.25, inv}};
  auto pick = [a, b](Vec2 p) {
    const double da = (p - a.center).norm() - a.prof.r0;
    const double db = (p - b.center).norm() - b.prof.r0;
    return da <= db;
  };
  ScalarFunction f;
  f.value = [a, b, pick](Vec2 p) { return pick(p) ? a.value(p) : b.value(p); };
  f.grad = [a, b, pick](Vec2 p) { return pick(p) ? a.grad(p) : b.grad(p); };
  f.hess = [a, b, pick](Vec2 p) { return pick(p) ? a.hess(p) : b.hess(p); };
  f.bilap = [a, b, pick](Vec2 p) { return pick(p) ? a.bilap(p) : b.bilap(p); };
  return f;
}

// cos(pi x) with full derivative data.
inline ScalarFunction cos_pix() {
  const double pi = M_PI;
  ScalarFunction f;
  f.value = [pi](Vec2 p) { return std::cos(pi * p.x()); };
  f.grad = [pi](Vec2 p) { return Vec2(-pi * std::sin(pi * p.x()), 0.0); };
  f.hess = [pi](Vec2 p) {
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    h(0, 0) = -pi * pi * std::cos(pi * p.x());
    return h;
  };
  f.bilap = [pi](Vec2 p) { return pi * pi * pi * pi * std::cos(pi * p.x()); };
  return f;
}

// c * cos(pi x) cos(pi y) with full derivative data.
inline ScalarFunction cos_pix_piy(double scale = 1.0) {
  const double pi = M_PI;
  ScalarFunction f;
  f.value = [pi, scale](Vec2 p) {
    return scale * std::cos(pi * p.x()) * std::cos(pi * p.y());
  };
  f.grad = [pi, scale](Vec2 p) {
    return Vec2(-scale * pi * std::sin(pi * p.x()) * std::cos(pi * p.y()),
                -scale * pi * std::cos(pi * p.x()) * std::sin(pi * p.y()));
  };
  f.hess = [pi, scale](Vec2 p) {
    const double cx = std::cos(pi * p.x()), sx = std::sin(pi * p.x());
    const double cy = std::cos(pi * p.y()), sy = std::sin(pi * p.y());
    Eigen::Matrix2d h;
    h << -scale * pi * pi * cx * cy, scale * pi * pi * sx * sy,
        scale * pi * pi * sx * sy, -scale * pi * pi * cx * cy;
    return h;
  };
  f.bilap = [pi, scale](Vec2 p) {
    return 4.0 * scale * std::pow(pi, 4) * std::cos(pi * p.x()) *
           std::cos(pi * p.y());
  };
  return f;
}

// sin(pi x) cos(pi y) with full derivative data.
inline ScalarFunction sin_pix_cos_piy() {
  const double pi = M_PI;
  ScalarFunction f;
  f.value = [pi](Vec2 p) { return std::sin(pi * p.x()) * std::cos(pi * p.y()); };
  f.grad = [pi](Vec2 p) {
    return Vec2(pi * std::cos(pi * p.x()) * std::cos(pi * p.y()),
                -pi * std::sin(pi * p.x()) * std::sin(pi * p.y()));
  };
  f.hess = [pi](Vec2 p) {
    const double cx = std::cos(pi * p.x()), sx = std::sin(pi * p.x());
    const double cy = std::cos(pi * p.y()), sy = std::sin(pi * p.y());
    Eigen::Matrix2d h;
    h << -pi * pi * sx * cy, -pi * pi * cx * sy, -pi * pi * cx * sy,
        -pi * pi * sx * cy;
    return h;
  };
  f.bilap = [pi](Vec2 p) {
    return 4.0 * std::pow(pi, 4) * std::sin(pi * p.x()) * std::cos(pi * p.y());
  };
  return f;
}

// Manufactured solution u*(x, t) = exp(-t) cos(pi x) cos(pi y); satisfies the
// homogeneous Neumann conditions on [-1,1]^2.
inline ScalarFunction manufactured_state(double t) {
  return cos_pix_piy(std::exp(-t));
}

// Source that makes u* solve u_t + lap(eps lap u - f(u)/eps) = g with
// f(u) = u^3 - u:  g = u*_t + eps lap^2 u* - (1/eps) lap f(u*).
inline std::function<double(Vec2)> manufactured_source(double t, double eps) {
  const double pi = M_PI;
  const double a = std::exp(-t);
  return [pi, a, eps](Vec2 p) {
    const double cx = std::cos(pi * p.x()), sx = std::sin(pi * p.x());
    const double cy = std::cos(pi * p.y()), sy = std::sin(pi * p.y());
    const double u = a * cx * cy;
    const double lap_u = -2.0 * pi * pi * u;
    const double bilap_u = 4.0 * std::pow(pi, 4) * u;
    const double grad2 = a * a * pi * pi * (sx * sx * cy * cy + cx * cx * sy * sy);
    const double lap_f = (3.0 * u * u - 1.0) * lap_u + 6.0 * u * grad2;
    return -u + eps * bilap_u - lap_f / eps;
  };
}

}  // namespace morley
