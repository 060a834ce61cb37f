#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "accmd/common.hpp"
#include "accmd/format.hpp"
#include "accmd/linalg.hpp"
#include "accmd/lyapunov.hpp"
#include "accmd/mirror.hpp"
#include "accmd/objective.hpp"
#include "accmd/ratefit.hpp"

namespace accmd {

enum class Algorithm {
  md,
  accmd_forward,
  accmd_backward,
  perturbed,
  homotopy,
  composite_backward,
};

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::md: return "md";
    case Algorithm::accmd_forward: return "accmd-forward";
    case Algorithm::accmd_backward: return "accmd-backward";
    case Algorithm::perturbed: return "perturbed";
    case Algorithm::homotopy: return "homotopy";
    case Algorithm::composite_backward: return "composite-backward";
  }
  return "?";
}

inline std::optional<Algorithm> algorithm_from_name(const std::string& s) {
  for (Algorithm a :
       {Algorithm::md, Algorithm::accmd_forward, Algorithm::accmd_backward,
        Algorithm::perturbed, Algorithm::homotopy,
        Algorithm::composite_backward})
    if (s == algorithm_name(a)) return a;
  return std::nullopt;
}

// Exactly the parameters required by the chosen algorithm may be set; the
// rest must stay empty (validated before any computation starts).
struct SolverConfig {
  Algorithm algorithm = Algorithm::accmd_forward;

  std::optional<double> alpha;     // momentum weight (accelerated methods)
  std::optional<double> step;      // plain MD step size, default 1/L
  std::optional<double> epsilon0;  // perturbed: the perturbation;
                                   // homotopy: initial perturbation (default 1)
  std::optional<double> epsilon;   // homotopy: termination perturbation
  std::optional<int> m0;           // homotopy: initial stage length
  std::optional<int> stages;       // homotopy: fixed stage count (overrides
                                   // the termination perturbation)

  double tol = 1e-12;              // stopping: residual_sq <= tol * residual_sq(x0)
  std::size_t max_iters = 100000;

  std::optional<double> mu_override;  // substitute strong-convexity constant
  std::optional<double> c_override;   // substitute cross-curvature constant

  std::optional<Vector> x0;  // start (must lie in the mirror domain);
                             // default: barycenter / ones / origin

  bool record_trajectory = false;  // keep (x, y, eta) per iteration
  bool record_time = false;        // fill the wall-clock column
};

struct SolverState {
  Vector x;
  Vector y;
  Vector eta;        // cached grad phi(y)
  Vector grad_prev;  // cached shifted (or plain) gradient at x_k
  std::size_t k = 0;
  double epsilon_current = 0.0;
};

// ---------------------------------------------------------------------------

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw config_error(std::string(what) + " must be positive");
  if (!std::isfinite(v)) throw config_error(std::string(what) + " must be finite");
}

inline Vector shifted_grad_eff(const SmoothObjective& f, const Vector& x,
                               double mu_eff) {
  if (mu_eff == f.mu()) return f.grad_shifted(x);
  Vector g = f.grad(x);
  if (mu_eff != 0.0) axpy(-mu_eff, f.mirror().grad(x), g);
  return g;
}

// Resolve y_{k+1} (and its cached dual) from the accumulated dual vector h:
// grad phi(y) scaled by (1+alpha) plus the beta-weighted nonsmooth term must
// meet h. Without a nonsmooth term the dual is kept exactly as h/(1+alpha).
inline void commit_dual(SolverState& s, const ProblemInstance& p, double alpha,
                        double beta, Vector h) {
  const auto& phi = p.f->mirror();
  if (p.g.is_zero()) {
    for (auto& t : h) t /= (1.0 + alpha);
    s.y = phi.grad_conjugate(h);
    s.eta = std::move(h);
  } else if (p.g.kind == NonsmoothTerm::Kind::simplex_indicator) {
    if (dynamic_cast<const EntropyMirror*>(&phi) == nullptr)
      throw config_error(
          "composite_prox: simplex indicator requires the entropy mirror");
    // Keep the dual in closed form: with z = h/(1+alpha) the prox output is
    // softmax(z) and its entropy gradient is z - (lse(z) - 1). Evaluating the
    // dual this way stays finite even when a softmax component underflows.
    for (auto& t : h) t /= (1.0 + alpha);
    const double shift = stable_log_sum_exp(h) - 1.0;
    s.y = stable_softmax(h);
    for (auto& t : h) t -= shift;
    s.eta = std::move(h);
  } else {
    s.y = composite_prox(phi, alpha, beta, h, p.g);
    s.eta = phi.grad(s.y);
  }
  if (!all_finite(s.y) || !all_finite(s.eta))
    throw step_error("dual update produced a non-finite iterate");
}

[[noreturn]] inline void rethrow_as_step_error(const ProblemInstance& p,
                                               std::size_t k,
                                               const std::exception& e) {
  throw step_error(std::string(p.name) + " step k=" + std::to_string(k) +
                   ": " + e.what());
}

}  // namespace detail

// One mirror-descent step: grad phi(x') = grad phi(x) - a * grad f(x),
// through the composite prox when a nonsmooth term is present.
inline void md_step(SolverState& s, const ProblemInstance& p, double alpha_k) {
  detail::require_positive(alpha_k, "md step size");
  const auto& f = *p.f;
  const auto& phi = f.mirror();
  try {
    Vector h = phi.grad(s.x);
    axpy(-alpha_k, f.grad(s.x), h);
    detail::commit_dual(s, p, 0.0, alpha_k, std::move(h));
    s.x = s.y;
  } catch (const domain_error& e) {
    detail::rethrow_as_step_error(p, s.k, e);
  }
  ++s.k;
}

// Forward accelerated step. The primal iterate is the convex combination
// x' = (x + a y)/(1 + a); the dual then extrapolates the shifted gradient:
// (1+a) grad phi(y') = grad phi(y) - (a/mu)(2 grad_psi(x') - grad_psi(x)).
// state.grad_prev must hold grad_psi(x_k) on entry (and holds grad_psi(x_{k+1})
// on exit).
inline void accmd_forward_step(SolverState& s, const ProblemInstance& p,
                               std::optional<double> alpha_opt = std::nullopt,
                               std::optional<double> mu_opt = std::nullopt) {
  const auto& f = *p.f;
  const double mu = mu_opt.value_or(f.mu());
  if (!(mu > 0.0))
    throw config_error("forward accelerated step requires mu > 0");
  const double alpha = alpha_opt ? *alpha_opt : std::sqrt(mu / p.gcs.value);
  detail::require_positive(alpha, "alpha");
  try {
    const std::size_t n = s.x.size();
    const double w = 1.0 / (1.0 + alpha);
    Vector xn(n);
    for (std::size_t i = 0; i < n; ++i)
      xn[i] = (s.x[i] + alpha * s.y[i]) * w;
    Vector gs = detail::shifted_grad_eff(f, xn, mu);
    Vector h = s.eta;
    const double coef = alpha / mu;
    for (std::size_t i = 0; i < n; ++i)
      h[i] -= coef * (2.0 * gs[i] - s.grad_prev[i]);
    detail::commit_dual(s, p, alpha, alpha / mu, std::move(h));
    s.x = std::move(xn);
    s.grad_prev = std::move(gs);
  } catch (const domain_error& e) {
    detail::rethrow_as_step_error(p, s.k, e);
  }
  ++s.k;
}

namespace detail {

// Shared core of the backward and composite-backward steps; weight is mu for
// the strongly convex regime or the perturbation epsilon when substituted.
inline void backward_core(SolverState& s, const ProblemInstance& p,
                          double weight, double alpha) {
  const auto& f = *p.f;
  const auto& phi = f.mirror();
  const std::size_t n = s.x.size();
  Vector h = phi.grad(s.x);
  const Vector gf = f.grad(s.x);
  const double coef = alpha / weight;
  for (std::size_t i = 0; i < n; ++i)
    h[i] = alpha * h[i] + s.eta[i] - coef * gf[i];
  const Vector y_old = s.y;
  commit_dual(s, p, alpha, coef, std::move(h));
  const double w = 1.0 / (1.0 + alpha);
  Vector xn(n);
  for (std::size_t i = 0; i < n; ++i)
    xn[i] = (s.x[i] + alpha * (2.0 * s.y[i] - y_old[i])) * w;
  if (!all_finite(xn))
    throw step_error("backward update produced a non-finite iterate");
  s.x = std::move(xn);
}

}  // namespace detail

// Backward accelerated step:
// (1+a) grad phi(y') = a grad phi(x) + grad phi(y) - (a/mu) grad f(x),
// then x' = [x + a (2 y' - y)]/(1 + a).
inline void accmd_backward_step(SolverState& s, const ProblemInstance& p,
                                std::optional<double> alpha_opt = std::nullopt,
                                std::optional<double> mu_opt = std::nullopt) {
  const double mu = mu_opt.value_or(p.f->mu());
  if (!(mu > 0.0))
    throw config_error("backward accelerated step requires mu > 0");
  const double alpha = alpha_opt ? *alpha_opt : std::sqrt(mu / p.gcs.value);
  detail::require_positive(alpha, "alpha");
  try {
    detail::backward_core(s, p, mu, alpha);
  } catch (const domain_error& e) {
    detail::rethrow_as_step_error(p, s.k, e);
  }
  ++s.k;
}

// Composite variant of the backward step; the dual update runs through
// composite_prox with weight beta = alpha/mu. With a zero nonsmooth term this
// is the same code path as accmd_backward_step, so trajectories coincide
// bitwise.
inline void composite_backward_step(
    SolverState& s, const ProblemInstance& p,
    std::optional<double> alpha_opt = std::nullopt,
    std::optional<double> mu_opt = std::nullopt) {
  accmd_backward_step(s, p, alpha_opt, mu_opt);
}

// Backward step with the perturbation substituted for mu; used inside the
// homotopy scheme on composite problems without strong convexity.
inline void perturbed_backward_step(SolverState& s, const ProblemInstance& p,
                                    double epsilon,
                                    std::optional<double> alpha_opt = std::nullopt) {
  detail::require_positive(epsilon, "epsilon");
  const double alpha =
      alpha_opt ? *alpha_opt : std::sqrt(epsilon / p.gcs.value);
  detail::require_positive(alpha, "alpha");
  try {
    detail::backward_core(s, p, epsilon, alpha);
  } catch (const domain_error& e) {
    detail::rethrow_as_step_error(p, s.k, e);
  }
  s.epsilon_current = epsilon;
  ++s.k;
}

// Perturbed forward step (no strong convexity needed): the plain gradient is
// extrapolated and epsilon takes the contraction role of mu.
// state.grad_prev must hold grad f(x_k) on entry.
inline void perturbed_step(SolverState& s, const ProblemInstance& p,
                           double epsilon,
                           std::optional<double> alpha_opt = std::nullopt) {
  detail::require_positive(epsilon, "epsilon");
  const auto& f = *p.f;
  const auto& phi = f.mirror();
  const double alpha =
      alpha_opt ? *alpha_opt : std::sqrt(epsilon / p.gcs.value);
  detail::require_positive(alpha, "alpha");
  try {
    const std::size_t n = s.x.size();
    const double w = 1.0 / (1.0 + alpha);
    Vector xn(n);
    for (std::size_t i = 0; i < n; ++i)
      xn[i] = (s.x[i] + alpha * s.y[i]) * w;
    Vector gf = f.grad(xn);
    Vector h = phi.grad(xn);
    const double coef = alpha / epsilon;
    for (std::size_t i = 0; i < n; ++i)
      h[i] = alpha * h[i] + s.eta[i] - coef * (2.0 * gf[i] - s.grad_prev[i]);
    detail::commit_dual(s, p, alpha, coef, std::move(h));
    s.x = std::move(xn);
    s.grad_prev = std::move(gf);
  } catch (const domain_error& e) {
    detail::rethrow_as_step_error(p, s.k, e);
  }
  s.epsilon_current = epsilon;
  ++s.k;
}

// ---------------------------------------------------------------------------

// Initial iterate by domain: uniform distribution on the simplex, the ones
// vector on the positive orthant, the origin on full space. x0 = y0.
inline SolverState initial_state(const ProblemInstance& p, Algorithm alg,
                                 std::optional<double> mu_opt = std::nullopt,
                                 const Vector* x0 = nullptr) {
  const auto& f = *p.f;
  const auto& phi = f.mirror();
  const std::size_t n = f.dim();
  SolverState s;
  if (x0 != nullptr) {
    if (x0->size() != n)
      throw config_error("initial point dimension mismatch");
    if (!all_finite(*x0))
      throw config_error("initial point must be finite");
    if (phi.domain() != Domain::full_space)
      for (double t : *x0)
        if (!(t > 0.0))
          throw config_error("initial point must lie in the mirror domain");
    if (phi.domain() == Domain::simplex) {
      double sum = 0.0;
      for (double t : *x0) sum += t;
      if (std::abs(sum - 1.0) > 1e-9)
        throw config_error("initial point must lie on the simplex");
    }
    s.x = *x0;
  } else {
    switch (phi.domain()) {
      case Domain::simplex:
        s.x.assign(n, 1.0 / static_cast<double>(n));
        break;
      case Domain::positive_orthant:
        s.x.assign(n, 1.0);
        break;
      case Domain::full_space:
        s.x.assign(n, 0.0);
        break;
    }
  }
  s.y = s.x;
  s.eta = phi.grad(s.y);
  switch (alg) {
    case Algorithm::accmd_forward:
      s.grad_prev = detail::shifted_grad_eff(f, s.x, mu_opt.value_or(f.mu()));
      break;
    default:
      s.grad_prev = f.grad(s.x);
      break;
  }
  return s;
}

struct TraceRecord {
  std::size_t k = 0;
  double obj = 0.0;           // f(x) + g(x)
  double grad_norm_sq = 0.0;  // ||grad f(x)||^2
  std::optional<double> lyap_e;
  std::optional<double> lyap_ealpha;
  std::optional<double> time_ms;
};

struct TrajectoryPoint {
  Vector x;
  Vector y;
  Vector eta;
  double epsilon = 0.0;  // perturbation in force at this iterate (0 if none)
  double alpha = 0.0;    // momentum weight used to reach this iterate
};

struct Trace {
  std::string problem;
  std::string algorithm;
  std::size_t dim = 0;
  std::uint64_t seed = 0;

  // resolved run parameters
  double mu_used = 0.0;
  double c_used = 0.0;
  double l_used = 0.0;
  double alpha_used = 0.0;    // primary momentum weight (first stage for homotopy)
  double step_used = 0.0;     // plain MD only
  double epsilon0_used = 0.0;
  double tol_used = 0.0;
  std::size_t max_iters_used = 0;

  std::vector<TraceRecord> records;
  std::vector<TrajectoryPoint> trajectory;  // aligned with records when kept

  std::size_t iterations = 0;  // completed steps (= records.size() - 1)
  bool converged = false;
  bool aborted = false;
  std::string diagnostic;
  double residual0_sq = 0.0;
  double residual_final_sq = 0.0;

  std::vector<std::size_t> stage_ends;   // homotopy: cumulative k per stage
  std::vector<double> stage_epsilons;    // homotopy: epsilon per stage
  std::optional<double> measured_radius; // sup_k D_phi(x*,x_k) + D_phi(x*,y_k)

  Vector x_final;  // last iterate, also on abort (partial progress)
  Vector y_final;
};

// Stopping residual: squared gradient norm for smooth problems; for composite
// problems the squared norm of the unit-step prox residual (x - T(x))/s with
// s = 1/L, which vanishes exactly at constrained/composite optima.
struct Residuals {
  double grad_norm_sq = 0.0;
  double stop_sq = 0.0;
};

inline Residuals measure_residuals(const ProblemInstance& p, const Vector& x) {
  const auto& f = *p.f;
  Vector gf = f.grad(x);
  const double gsq = dot(gf, gf);
  if (p.g.is_zero()) return {gsq, gsq};
  const double s = 1.0 / f.smoothness();
  Vector t;
  if (p.g.kind == NonsmoothTerm::Kind::simplex_indicator) {
    // log extends to x_i = 0 as -inf (softmax weight 0), so the residual is
    // defined on the whole simplex, boundary included.
    Vector h(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      h[i] = std::log(x[i]) + 1.0 - s * gf[i];
    t = stable_softmax(h);
  } else {
    Vector h = f.mirror().grad(x);
    axpy(-s, gf, h);
    t = composite_prox(f.mirror(), 0.0, s, h, p.g);
  }
  const Vector d = sub(x, t);
  return {gsq, dot(d, d) / (s * s)};
}

namespace detail {

inline void validate_config(const SolverConfig& c) {
  const Algorithm a = c.algorithm;
  const bool homotopy = a == Algorithm::homotopy;
  const bool perturbed = a == Algorithm::perturbed;
  if (c.step && a != Algorithm::md)
    throw config_error("step applies only to plain mirror descent");
  if (c.alpha && a == Algorithm::md)
    throw config_error("alpha applies to accelerated methods; use step");
  if (c.epsilon0 && !perturbed && !homotopy)
    throw config_error("epsilon0 applies to perturbed and homotopy runs");
  if (c.epsilon && !homotopy)
    throw config_error("epsilon (termination) applies to homotopy runs");
  if (c.m0 && !homotopy)
    throw config_error("m0 applies to homotopy runs");
  if (c.stages && !homotopy)
    throw config_error("stages applies to homotopy runs");
  if (perturbed && !c.epsilon0)
    throw config_error("perturbed run requires epsilon0");
  if (c.step) require_positive(*c.step, "step");
  if (c.alpha) require_positive(*c.alpha, "alpha");
  if (c.epsilon0) require_positive(*c.epsilon0, "epsilon0");
  if (c.epsilon) require_positive(*c.epsilon, "epsilon");
  if (c.m0 && *c.m0 < 1) throw config_error("m0 must be >= 1");
  if (c.stages && *c.stages < 1) throw config_error("stages must be >= 1");
  if (c.tol < 0.0 || !std::isfinite(c.tol))
    throw config_error("tol must be finite and >= 0");
  if (c.mu_override) require_positive(*c.mu_override, "mu override");
  if (c.c_override) require_positive(*c.c_override, "C override");
}

struct LyapunovSpec {
  LyapunovSuite::Base base = LyapunovSuite::Base::shifted;
  double weight = 0.0;
  double beta = 0.0;  // tilt for the lyap_Ealpha column
  bool mirror_only = false;  // plain MD: D_phi(x*, x) in lyap_E
};

}  // namespace detail

inline Trace run(const ProblemInstance& p, const SolverConfig& cfg,
                 const Vector* xstar = nullptr);

// Homotopy outer loop: stage j runs ceil(m0 * 2^{j/2}) inner steps at
// perturbation eps0 * 2^{-j}, warm-started from the previous stage. Stops
// after the first stage whose perturbation reached the termination value
// (or after a fixed stage count when configured).
inline Trace homotopy_run(const ProblemInstance& p, const SolverConfig& cfg,
                          const Vector* xstar = nullptr) {
  SolverConfig c = cfg;
  c.algorithm = Algorithm::homotopy;
  return run(p, c, xstar);
}

inline Trace run(const ProblemInstance& p, const SolverConfig& cfg,
                 const Vector* xstar) {
  detail::validate_config(cfg);
  const auto& f = *p.f;
  const Algorithm alg = cfg.algorithm;

  const double mu_eff = cfg.mu_override.value_or(f.mu());
  const double c_eff = cfg.c_override.value_or(p.gcs.value);
  const double l_eff = f.smoothness();
  if (!(c_eff > 0.0))
    throw config_error("cross-curvature constant must be positive");

  const bool needs_mu = alg == Algorithm::accmd_forward ||
                        alg == Algorithm::accmd_backward ||
                        alg == Algorithm::composite_backward;
  if (needs_mu && !(mu_eff > 0.0))
    throw config_error(std::string(algorithm_name(alg)) +
                       " requires mu > 0; use the perturbed or homotopy "
                       "variant instead");

  // Homotopy on l1-composite problems replaces the forward extrapolation with
  // the backward composite step (epsilon substituted for mu).
  const bool homotopy_backward =
      alg == Algorithm::homotopy && p.g.kind == NonsmoothTerm::Kind::l1;

  double md_stepsize = 0.0, alpha0 = 0.0, eps0 = 0.0, eps_target = 0.0;
  double m0 = 0.0;
  int fixed_stages = 0;
  switch (alg) {
    case Algorithm::md:
      md_stepsize = cfg.step.value_or(1.0 / l_eff);
      break;
    case Algorithm::accmd_forward:
    case Algorithm::accmd_backward:
    case Algorithm::composite_backward:
      alpha0 = cfg.alpha ? *cfg.alpha : std::sqrt(mu_eff / c_eff);
      break;
    case Algorithm::perturbed:
      eps0 = *cfg.epsilon0;
      alpha0 = cfg.alpha ? *cfg.alpha : std::sqrt(eps0 / c_eff);
      break;
    case Algorithm::homotopy: {
      eps0 = cfg.epsilon0.value_or(1.0);
      m0 = cfg.m0 ? static_cast<double>(*cfg.m0)
                  : std::max(1.0, std::ceil(std::sqrt(c_eff / eps0)));
      fixed_stages = cfg.stages.value_or(0);
      eps_target = cfg.epsilon.value_or(eps0 * 0x1p-20);
      alpha0 = std::sqrt(eps0 / (2.0 * c_eff));  // first stage
      break;
    }
  }

  std::optional<LyapunovSuite> suite;
  if (xstar != nullptr) suite.emplace(p.f, *xstar, mu_eff);
  detail::LyapunovSpec lspec;
  switch (alg) {
    case Algorithm::md:
      lspec.mirror_only = true;
      break;
    case Algorithm::accmd_forward:
      lspec = {LyapunovSuite::Base::shifted, mu_eff, alpha0, false};
      break;
    case Algorithm::accmd_backward:
    case Algorithm::composite_backward:
      lspec = {LyapunovSuite::Base::shifted, mu_eff, -alpha0, false};
      break;
    case Algorithm::perturbed:
      lspec = {LyapunovSuite::Base::plain, eps0, alpha0, false};
      break;
    case Algorithm::homotopy:
      lspec = {LyapunovSuite::Base::plain, eps0,
               homotopy_backward ? -alpha0 : alpha0, false};
      break;
  }

  Trace tr;
  tr.problem = p.name;
  tr.algorithm = algorithm_name(alg);
  tr.dim = f.dim();
  tr.seed = p.seed;
  tr.mu_used = mu_eff;
  tr.c_used = c_eff;
  tr.l_used = l_eff;
  tr.alpha_used = alpha0;
  tr.step_used = md_stepsize;
  tr.epsilon0_used = eps0;
  tr.tol_used = cfg.tol;
  tr.max_iters_used = cfg.max_iters;

  SolverState s =
      initial_state(p, alg, mu_eff, cfg.x0 ? &*cfg.x0 : nullptr);
  // The perturbation in force at the first step (stage 1 for homotopy), so
  // that the k = 0 Lyapunov cells pair with the k = 1 cells.
  const double eps_first = alg == Algorithm::homotopy ? 0.5 * eps0 : eps0;
  if (alg == Algorithm::perturbed || alg == Algorithm::homotopy)
    s.epsilon_current = eps_first;

  const auto t_start = std::chrono::steady_clock::now();
  double radius = 0.0;

  // Appends one record (and trajectory point); false on a non-finite
  // objective, in which case nothing is appended.
  const auto record = [&](const Residuals& r, double alpha_now,
                          double eps_now) {
    TraceRecord rec;
    rec.k = s.k;
    rec.obj = p.composite_value(s.x);
    if (!std::isfinite(rec.obj)) return false;
    rec.grad_norm_sq = r.grad_norm_sq;
    if (suite) {
      if (lspec.mirror_only) {
        rec.lyap_e = suite->mirror_div_from(s.x);
      } else {
        const double w =
            lspec.base == LyapunovSuite::Base::plain ? eps_now : lspec.weight;
        const double beta = lspec.beta < 0.0 ? -alpha_now : alpha_now;
        rec.lyap_e = suite->energy(lspec.base, w, s.x, s.y);
        rec.lyap_ealpha =
            suite->tilted_energy(lspec.base, w, beta, s.x, s.y);
      }
      radius = std::max(radius,
                        suite->mirror_div_from(s.x) + suite->mirror_div_from(s.y));
      tr.measured_radius = radius;
    }
    if (cfg.record_time) {
      const auto dt = std::chrono::steady_clock::now() - t_start;
      rec.time_ms =
          std::chrono::duration<double, std::milli>(dt).count();
    }
    tr.records.push_back(std::move(rec));
    if (cfg.record_trajectory)
      tr.trajectory.push_back({s.x, s.y, s.eta, eps_now, alpha_now});
    return true;
  };

  Residuals r0 = measure_residuals(p, s.x);
  if (!std::isfinite(r0.stop_sq) ||
      !record(r0, alpha0, s.epsilon_current)) {
    tr.aborted = true;
    tr.diagnostic = "non-finite objective or residual at the initial point";
    tr.x_final = s.x;
    tr.y_final = s.y;
    return tr;
  }
  tr.residual0_sq = r0.stop_sq;
  tr.residual_final_sq = r0.stop_sq;
  if (r0.stop_sq == 0.0) {
    tr.converged = true;
    tr.x_final = s.x;
    tr.y_final = s.y;
    return tr;
  }
  const double threshold = cfg.tol * r0.stop_sq;

  // Inner driver shared by all algorithms: one step + one record, updating
  // the termination flags. Returns false when the run should stop.
  bool done = false;
  const auto advance = [&](double alpha_now, double eps_now) {
    if (s.k >= cfg.max_iters) {
      done = true;
      return false;
    }
    try {
      switch (alg) {
        case Algorithm::md:
          md_step(s, p, md_stepsize);
          break;
        case Algorithm::accmd_forward:
          accmd_forward_step(s, p, alpha_now, mu_eff);
          break;
        case Algorithm::accmd_backward:
        case Algorithm::composite_backward:
          accmd_backward_step(s, p, alpha_now, mu_eff);
          break;
        case Algorithm::perturbed:
          perturbed_step(s, p, eps_now, alpha_now);
          break;
        case Algorithm::homotopy:
          if (homotopy_backward)
            perturbed_backward_step(s, p, eps_now, alpha_now);
          else
            perturbed_step(s, p, eps_now, alpha_now);
          break;
      }
      const Residuals r = measure_residuals(p, s.x);
      if (!std::isfinite(r.stop_sq) || !record(r, alpha_now, eps_now)) {
        tr.aborted = true;
        tr.diagnostic = "non-finite objective or residual at k=" +
                        std::to_string(s.k);
        done = true;
        return false;
      }
      tr.iterations = s.k;
      tr.residual_final_sq = r.stop_sq;
      if (r.stop_sq <= threshold) {
        tr.converged = true;
        done = true;
        return false;
      }
    } catch (const step_error& e) {
      tr.aborted = true;
      tr.diagnostic = e.what();
      done = true;
      return false;
    } catch (const domain_error& e) {
      tr.aborted = true;
      tr.diagnostic = std::string("iterate left the domain at k=") +
                      std::to_string(s.k) + ": " + e.what();
      done = true;
      return false;
    }
    if (s.k >= cfg.max_iters) {
      done = true;
      return false;
    }
    return true;
  };

  if (alg == Algorithm::homotopy) {
    constexpr int max_stages = 200;
    for (int stage = 1; !done && stage <= max_stages; ++stage) {
      const double eps_j = eps0 * std::exp2(-static_cast<double>(stage));
      const double alpha_j = std::sqrt(eps_j / c_eff);
      const auto m_j = static_cast<std::size_t>(
          std::ceil(m0 * std::exp2(0.5 * static_cast<double>(stage))));
      for (std::size_t i = 0; i < m_j && !done; ++i) advance(alpha_j, eps_j);
      tr.stage_ends.push_back(s.k);
      tr.stage_epsilons.push_back(eps_j);
      if (fixed_stages > 0) {
        if (stage >= fixed_stages) break;
      } else if (eps_j <= eps_target) {
        break;
      }
    }
  } else {
    while (!done) advance(alpha0, eps0);
  }
  tr.x_final = s.x;
  tr.y_final = s.y;
  return tr;
}

// First recorded iteration whose objective gap has shrunk to `rel` times the
// initial gap, measured against a reference value; empty when the trace never
// gets there. Starting at or below the reference counts as already solved.
inline std::optional<std::size_t> iterations_to_target(const Trace& tr,
                                                       double f_ref,
                                                       double rel) {
  if (tr.records.empty()) return std::nullopt;
  const double gap0 = tr.records.front().obj - f_ref;
  if (!(gap0 > 0.0)) return 0;
  for (const auto& r : tr.records)
    if (r.obj - f_ref <= rel * gap0) return r.k;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trace serialization. CSV columns are fixed; cells not computed stay empty.

inline void write_trace_csv(std::ostream& out, const Trace& tr) {
  out << "k,obj,grad_norm_sq,lyap_E,lyap_Ealpha,time_ms\n";
  for (const auto& r : tr.records) {
    out << r.k << "," << format_double(r.obj) << ","
        << format_double(r.grad_norm_sq) << ",";
    if (r.lyap_e) out << format_double(*r.lyap_e);
    out << ",";
    if (r.lyap_ealpha) out << format_double(*r.lyap_ealpha);
    out << ",";
    if (r.time_ms) out << format_double(*r.time_ms);
    out << "\n";
  }
}

inline void write_trace_csv(const std::string& path, const Trace& tr) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write trace file: " + path);
  write_trace_csv(out, tr);
}

inline nlohmann::ordered_json trace_summary_json(const Trace& tr) {
  nlohmann::ordered_json j;
  j["problem"] = tr.problem;
  j["algorithm"] = tr.algorithm;
  j["dim"] = tr.dim;
  j["seed"] = tr.seed;
  nlohmann::ordered_json cfgj;
  cfgj["mu"] = tr.mu_used;
  cfgj["C"] = tr.c_used;
  cfgj["L"] = tr.l_used;
  cfgj["alpha"] = tr.alpha_used;
  if (tr.step_used > 0.0) cfgj["step"] = tr.step_used;
  if (tr.epsilon0_used > 0.0) cfgj["epsilon0"] = tr.epsilon0_used;
  cfgj["tol"] = tr.tol_used;
  cfgj["max_iters"] = tr.max_iters_used;
  j["config"] = cfgj;
  j["iterations"] = tr.iterations;
  j["converged"] = tr.converged;
  j["aborted"] = tr.aborted;
  if (tr.aborted) j["diagnostic"] = tr.diagnostic;
  if (!tr.records.empty()) {
    const auto& last = tr.records.back();
    nlohmann::ordered_json fin;
    fin["obj"] = last.obj;
    fin["grad_norm_sq"] = last.grad_norm_sq;
    fin["residual_ratio"] =
        tr.residual0_sq > 0.0 ? tr.residual_final_sq / tr.residual0_sq : 0.0;
    if (last.lyap_e) fin["lyap_E"] = *last.lyap_e;
    if (last.lyap_ealpha) fin["lyap_Ealpha"] = *last.lyap_ealpha;
    j["final"] = fin;
  }
  {
    // Decay-rate fit of the gradient-norm column (squared), tail half.
    std::vector<double> ks, vals;
    for (const auto& r : tr.records) {
      ks.push_back(static_cast<double>(r.k));
      vals.push_back(r.grad_norm_sq);
    }
    const RateFit fit =
        fit_rate(ks, vals, 0.0, std::max<std::size_t>(10, ks.size() / 2));
    nlohmann::ordered_json fj;
    fj["conclusive"] = fit.conclusive;
    fj["points"] = fit.points;
    if (fit.conclusive) {
      fj["slope"] = fit.slope;
      fj["contraction"] = fit.contraction;
      fj["power_slope"] = fit.power_slope;
    }
    j["rate_fit"] = fj;
  }
  if (tr.measured_radius) j["measured_radius"] = *tr.measured_radius;
  if (!tr.stage_ends.empty()) {
    j["stage_ends"] = tr.stage_ends;
    j["stage_epsilons"] = tr.stage_epsilons;
  }
  return j;
}

inline void write_trace_json(const std::string& path, const Trace& tr) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write summary file: " + path);
  out << trace_summary_json(tr).dump(2) << "\n";
}

}  // namespace accmd
