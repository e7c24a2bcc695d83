#pragma once

// Fully implicit time stepping: per step, Newton solve of
//   M (u - u_prev)/k + eps A u + (1/eps) N(u) = (g, phi)   in the reduced
// Morley space, with per-step trace recording (energy, mass, extrema).

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "morley/enrich.hpp"
#include "morley/forms.hpp"

namespace morley {

struct SimConfig {
  double epsilon = 0.05;
  double dt = 1e-4;
  double t_final = 5e-3;
  int n = 50;
  double newton_tol = 1e-12;  // relative to the first residual of the step
  int newton_max_iter = 30;
  double alpha = -1.0;  // projection shift; negative requests max(1, eps^-3)
  double beta = 1.0;    // b_h shift used by the H^-1 diagnostics
  std::string initial = "circle-tanh";
  std::string init_mode = "projection";  // or "interpolation"
  int output_every = 0;                  // snapshot cadence; 0 = only endpoints
  bool retry_halved_dt = false;          // re-run a failed step as two k/2 steps
  std::string out_dir = "out";

  double alpha_or_default() const {
    return alpha < 0.0 ? std::max(1.0, 1.0 / (epsilon * epsilon * epsilon))
                       : alpha;
  }

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
    if (!(t_final > 0.0)) throw std::invalid_argument("config: t_final must be positive");
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (!(newton_tol > 0.0) || newton_tol > 1e-4)
      throw std::invalid_argument("config: newton_tol must lie in (0, 1e-4]");
    if (newton_max_iter < 1)
      throw std::invalid_argument("config: newton_max_iter must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("config: beta must be positive");
    if (init_mode != "projection" && init_mode != "interpolation")
      throw std::invalid_argument("config: init_mode must be projection or interpolation");
    if (output_every < 0)
      throw std::invalid_argument("config: output_every must be >= 0");
  }

  // Advisory report on the energy-law step-size conditions (constants taken
  // as 1, worst-case exponent gamma_1 = 0); informational only.
  std::vector<std::string> constraint_notes() const {
    const double h = 2.0 / n;
    auto line = [&](const char* label, double bound) {
      std::ostringstream os;
      os << label << " (need k >= " << bound << "): "
         << (dt >= bound ? "holds" : "violated");
      return os.str();
    };
    return {line("k >= h^2/eps", h * h / epsilon),
            line("k >= h^2/eps^3", h * h / std::pow(epsilon, 3)),
            line("k >= eps beta^2 h^2", epsilon * beta * beta * h * h)};
  }
};

inline ScalarFunction named_initial(const std::string& name, double eps) {
  if (name == "circle-tanh") return circle_tanh(eps);
  if (name == "two-circles-tanh") return two_circles_tanh(eps);
  throw std::invalid_argument("unknown initial condition: " + name);
}

// u_h^0: elliptic projection of the initial data (default) or its
// interpolant, forced into the reduced space either way.
inline Eigen::VectorXd initial_field(const ElementCache& cache,
                                     const ScalarFunction& u0,
                                     const SimConfig& cfg) {
  if (cfg.init_mode == "projection")
    return elliptic_projection(cache, u0, cfg.epsilon, cfg.alpha_or_default());
  if (cfg.init_mode != "interpolation")
    throw std::invalid_argument("init_mode must be projection or interpolation");
  const DofMask mask = DofMask::essential(cache.mesh());
  return mask.expand(mask.reduce(interpolate(cache.mesh(), u0)));
}

// Direct sparse solve with a residual guarantee.
inline Eigen::VectorXd linear_solve(const SpMat& A, const Eigen::VectorXd& b) {
  SpMat Ac = A;
  Ac.makeCompressed();
  Eigen::SparseLU<SpMat> lu(Ac);
  if (lu.info() != Eigen::Success)
    throw SolverError("linear_solve: factorization failed");
  const Eigen::VectorXd x = lu.solve(b);
  if ((A * x - b).norm() > 1e-12 * (1.0 + b.norm()))
    throw SolverError("linear_solve: residual too large");
  return x;
}

struct NewtonStats {
  int iterations = 0;
  std::vector<double> residuals;  // ||r|| before each update and at the end
};

struct TraceRow {
  int step;
  double time;
  double energy;
  double mass;
  double linf;          // max |u| over vertex values
  double increment_l2;  // ||u^n - u^{n-1}||_{0,2,h}
  int newton_iters;
};

struct Trace {
  std::vector<TraceRow> rows;
};

class Stepper {
 public:
  using Source = std::function<double(double, const Vec2&)>;

  Stepper(const ElementCache& cache, const SimConfig& cfg, Source source = {})
      : cache_(&cache),
        cfg_(cfg),
        source_(std::move(source)),
        mask_(DofMask::essential(cache.mesh())),
        M_(assemble_mass(cache)),
        A_(assemble_a_h(cache)) {
    cfg_.validate();
    Mr_ = mask_.reduce(M_);
    Ar_ = mask_.reduce(A_);
    // All Newton matrices share the element-block sparsity; fix the symbolic
    // factorization once.
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(cache.mesh().n_dofs());
    SpMat pattern = newton_matrix(zero, cfg_.dt);
    pattern.makeCompressed();
    lu_.analyzePattern(pattern);
  }

  const SpMat& mass() const { return M_; }
  const DofMask& mask() const { return mask_; }

  // One implicit step of size k ending at time t_new.
  Eigen::VectorXd step(const Eigen::VectorXd& u_prev, double k, double t_new,
                       int step_index = -1, NewtonStats* stats = nullptr) {
    const Eigen::VectorXd rp = mask_.reduce(u_prev);
    Eigen::VectorXd gr = Eigen::VectorXd::Zero(mask_.reduced_size());
    if (source_)
      gr = mask_.reduce(l2_functional(
          *cache_, [&](const Vec2& x) { return source_(t_new, x); }, 8));

    auto residual = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return Mr_ * (v - rp) / k + cfg_.epsilon * (Ar_ * v) +
             mask_.reduce(nonlinear_term(*cache_, mask_.expand(v))) /
                 cfg_.epsilon -
             gr;
    };

    Eigen::VectorXd v = rp;
    Eigen::VectorXd r = residual(v);
    double rnorm = r.norm();
    const double r0 = rnorm;
    NewtonStats local;
    NewtonStats& st = stats ? *stats : local;
    st.iterations = 0;
    st.residuals.assign(1, rnorm);

    const double target = std::max(cfg_.newton_tol * r0, 1e-14);
    for (int it = 1; rnorm > target; ++it) {
      if (it > cfg_.newton_max_iter)
        throw StepFailure("newton did not converge at step " +
                              std::to_string(step_index) + " (residual " +
                              std::to_string(rnorm) + ")",
                          step_index, cfg_.newton_max_iter, rnorm);
      SpMat J = newton_matrix(mask_.expand(v), k);
      J.makeCompressed();
      lu_.factorize(J);
      if (lu_.info() != Eigen::Success)
        throw SolverError("step: newton matrix factorization failed");
      const Eigen::VectorXd delta = lu_.solve(-r);
      if ((J * delta + r).norm() > 1e-12 * (1.0 + rnorm))
        throw SolverError("step: newton linear residual too large");

      // A correction at roundoff scale means the residual sits at the
      // attainable floor (it is bounded by ||J|| ||delta||): accept.  This is
      // what keeps the exact steady states fixed points in finite precision.
      if (delta.norm() <= 1e-12 * (1.0 + v.norm())) {
        v += delta;
        r = residual(v);
        st.iterations = it;
        st.residuals.push_back(r.norm());
        return mask_.expand(v);
      }

      // Full step first; halve on residual increase (at most 8 times).
      double lambda = 1.0;
      Eigen::VectorXd vn = v + delta;
      Eigen::VectorXd rn = residual(vn);
      for (int half = 0; half < 8 && rn.norm() > rnorm; ++half) {
        lambda *= 0.5;
        vn = v + lambda * delta;
        rn = residual(vn);
      }
      v = std::move(vn);
      r = std::move(rn);
      rnorm = r.norm();
      st.iterations = it;
      st.residuals.push_back(rnorm);
    }
    return mask_.expand(v);
  }

 private:
  SpMat newton_matrix(const Eigen::VectorXd& u_full, double k) const {
    return Mr_ / k + cfg_.epsilon * Ar_ +
           mask_.reduce(nonlinear_jacobian(*cache_, u_full)) / cfg_.epsilon;
  }

  const ElementCache* cache_;
  SimConfig cfg_;
  Source source_;
  DofMask mask_;
  SpMat M_, A_, Mr_, Ar_;
  Eigen::SparseLU<SpMat> lu_;
};

namespace detail {

inline TraceRow trace_row(const ElementCache& cache, const SpMat& M, int step,
                          double time, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& du, double eps, int iters) {
  TraceRow row;
  row.step = step;
  row.time = time;
  row.energy = discrete_energy(cache, u, eps);
  row.mass = field_integral(cache, u);
  row.linf = u.head(cache.mesh().n_vertices()).cwiseAbs().maxCoeff();
  row.increment_l2 = std::sqrt(std::max(0.0, du.dot(M * du)));
  row.newton_iters = iters;
  return row;
}

}  // namespace detail

// Advance ceil(T/k) steps from the configured initial state.  The trace is
// filled row by row so a thrown StepFailure leaves the completed prefix in
// place; `snapshot` fires at step 0, every `output_every` steps, and at the
// final step.
inline Eigen::VectorXd run_simulation(
    const ElementCache& cache, const SimConfig& cfg, const ScalarFunction& u0,
    Trace& trace,
    const std::function<void(int, double, const Eigen::VectorXd&)>& snapshot =
        {}) {
  cfg.validate();
  const int nsteps =
      static_cast<int>(std::ceil(cfg.t_final / cfg.dt - 1e-12));
  Eigen::VectorXd u = initial_field(cache, u0, cfg);
  Stepper stepper(cache, cfg);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(u.size());
  trace.rows.push_back(detail::trace_row(cache, stepper.mass(), 0, 0.0, u,
                                         zero, cfg.epsilon, 0));
  if (snapshot) snapshot(0, 0.0, u);

  for (int s = 1; s <= nsteps; ++s) {
    const double t = s * cfg.dt;
    NewtonStats stats;
    Eigen::VectorXd next;
    try {
      next = stepper.step(u, cfg.dt, t, s, &stats);
    } catch (const StepFailure&) {
      if (!cfg.retry_halved_dt) throw;
      NewtonStats s1, s2;
      const Eigen::VectorXd mid =
          stepper.step(u, 0.5 * cfg.dt, t - 0.5 * cfg.dt, s, &s1);
      next = stepper.step(mid, 0.5 * cfg.dt, t, s, &s2);
      stats.iterations = s1.iterations + s2.iterations;
      stats.residuals = s1.residuals;
      stats.residuals.insert(stats.residuals.end(), s2.residuals.begin(),
                             s2.residuals.end());
    }
    trace.rows.push_back(detail::trace_row(cache, stepper.mass(), s, t, next,
                                           next - u, cfg.epsilon,
                                           stats.iterations));
    u = std::move(next);
    if (snapshot && ((cfg.output_every > 0 && s % cfg.output_every == 0) ||
                     s == nsteps))
      snapshot(s, t, u);
  }
  return u;
}

inline Eigen::VectorXd run_simulation(
    const ElementCache& cache, const SimConfig& cfg, Trace& trace,
    const std::function<void(int, double, const Eigen::VectorXd&)>& snapshot =
        {}) {
  return run_simulation(cache, cfg, named_initial(cfg.initial, cfg.epsilon),
                        trace, snapshot);
}

}  // namespace morley
