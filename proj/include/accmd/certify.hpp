#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "accmd/common.hpp"
#include "accmd/linalg.hpp"
#include "accmd/lyapunov.hpp"
#include "accmd/mirror.hpp"
#include "accmd/objective.hpp"
#include "accmd/ratefit.hpp"
#include "accmd/rng.hpp"
#include "accmd/solver.hpp"

namespace accmd {

// Verification layer. Each check evaluates both sides of an algebraic
// identity (or inequality) through independent codepaths: the flow/step side
// from raw gradient inner products, the energy side from divergence values.
// Agreement is evidence that the step implementations, the energy evaluators,
// and the closed-form constants are mutually consistent. The identities carry
// an explicit anchor-gradient term, which makes them exact for every
// admissible anchor point; reference-minimizer quality therefore never leaks
// into identity residuals, only into rate fits.

struct CheckReport {
  std::string name;     // canonical check id, stable across runs
  std::string subject;  // mirror / problem / algorithm the check ran on
  std::size_t samples = 0;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  double tolerance = 0.0;  // threshold on the relative residual
  bool passed = false;     // max_rel_residual <= tolerance
  std::vector<std::pair<std::string, double>> extras;  // check-specific stats
};

// |lhs - rhs| / max(1, |lhs|, |rhs|): absolute near zero, relative at scale.
inline double rel_residual(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

namespace detail {

struct ResidualMax {
  double abs_max = 0.0;
  double rel_max = 0.0;
  std::size_t count = 0;

  void add(double lhs, double rhs) {
    ++count;
    abs_max = std::max(abs_max, std::abs(lhs - rhs));
    rel_max = std::max(rel_max, rel_residual(lhs, rhs));
  }

  CheckReport finish(std::string name, std::string subject,
                     double tolerance) const {
    CheckReport r;
    r.name = std::move(name);
    r.subject = std::move(subject);
    r.samples = count;
    r.max_abs_residual = abs_max;
    r.max_rel_residual = rel_max;
    r.tolerance = tolerance;
    r.passed = rel_max <= tolerance;
    return r;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Seeded in-domain samplers.

// Global draw for a mirror geometry: softmax of a scaled Gaussian on the
// simplex, exponentiated Gaussian on the positive orthant, plain Gaussian on
// the full space.
inline Vector sample_domain_point(Domain d, std::size_t dim, Rng& rng,
                                  double spread = 0.7) {
  Vector u = rng.gaussian_vector(dim);
  for (auto& t : u) t *= spread;
  switch (d) {
    case Domain::simplex:
      return stable_softmax(u);
    case Domain::positive_orthant:
      for (auto& t : u) t = std::exp(t);
      return u;
    case Domain::full_space:
      break;
  }
  return u;
}

// Uniform draw from the Euclidean ball of the given radius around a center:
// Gaussian direction, radial inverse-CDF length.
inline Vector sample_in_ball(const Vector& center, Rng& rng, double radius) {
  const Vector u = rng.gaussian_vector(center.size());
  const double nrm = norm_l2(u);
  Vector x = center;
  if (nrm == 0.0) return x;
  const double r =
      radius * std::pow(rng.uniform(),
                        1.0 / static_cast<double>(center.size()));
  axpy(r / nrm, u, x);
  return x;
}

// Perturbation of an anchor that respects the geometry: multiplicative in the
// orthant and simplex cases (renormalized on the simplex; zero anchor
// coordinates stay zero, so faces are preserved), additive on the full space.
// `radius` scales the log-space or linear displacement.
inline Vector sample_near(Domain d, const Vector& center, Rng& rng,
                          double radius) {
  const Vector u = rng.gaussian_vector(center.size());
  Vector x = center;
  switch (d) {
    case Domain::simplex: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = center[i] * std::exp(radius * u[i]);
        s += x[i];
      }
      if (!(s > 0.0))
        throw domain_error("sample_near: anchor is not on the simplex");
      for (auto& t : x) t /= s;
      return x;
    }
    case Domain::positive_orthant:
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = center[i] * std::exp(radius * u[i]);
      return x;
    case Domain::full_space:
      axpy(radius, u, x);
      return x;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Reference minimizer.

// Anchor for Lyapunov evaluations. Closed forms win; otherwise a deep run of
// the best solver for the regime: forward steps to a 1e-14 gradient-norm
// ratio when the problem is relatively strongly convex, a long homotopy
// schedule (prox-residual ratio 1e-12) otherwise. Identity checks are exact
// for any anchor, so the anchoring error only matters for rate fits and
// nonnegativity slacks, where it sits far below the asserted tolerances.
inline Vector reference_minimizer(const ProblemInstance& p) {
  if (auto known = p.f->known_minimizer()) return *known;
  SolverConfig cfg;
  if (p.f->mu() > 0.0) {
    cfg.algorithm = Algorithm::accmd_forward;
    cfg.tol = 1e-28;  // ratio of squared residuals
    cfg.max_iters = 500000;
  } else {
    cfg.algorithm = Algorithm::homotopy;
    cfg.tol = 1e-24;
    cfg.epsilon = 1e-12;
    cfg.max_iters = 2000000;
  }
  const Trace tr = run(p, cfg);
  if (tr.aborted) throw step_error("reference run aborted: " + tr.diagnostic);
  return tr.x_final;
}

// ---------------------------------------------------------------------------
// Bregman three-point identity.

// Both sides of  <grad phi(y) - grad phi(x), y - z> =
// D(y, x) + D(z, y) - D(z, x), gradients on the left, values on the right.
inline std::pair<double, double> three_point_sides(const MirrorFunction& phi,
                                                   const Vector& x,
                                                   const Vector& y,
                                                   const Vector& z) {
  const double lhs = dot(sub(phi.grad(y), phi.grad(x)), sub(y, z));
  const double rhs =
      phi.bregman(y, x) + phi.bregman(z, y) - phi.bregman(z, x);
  return {lhs, rhs};
}

inline CheckReport check_three_point(const MirrorFunction& phi,
                                     std::size_t dim, std::size_t samples,
                                     std::uint64_t seed,
                                     double tolerance = 1e-10) {
  detail::ResidualMax acc;
  Rng rng(derive_seed(seed, 11));
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = sample_domain_point(phi.domain(), dim, rng);
    const Vector y = sample_domain_point(phi.domain(), dim, rng);
    const Vector z = sample_domain_point(phi.domain(), dim, rng);
    const auto [lhs, rhs] = three_point_sides(phi, x, y, z);
    acc.add(lhs, rhs);
  }
  return acc.finish("three-point", phi.name(), tolerance);
}

// ---------------------------------------------------------------------------
// Dissipation identities of the continuous flows.

// Strongly convex flow at (x, y), with psi = f - mu*phi, eta = grad phi(y):
//   -grad E . G = E + D_psi(x*, x) + mu D_phi(y, x*) + <grad f(x*), y - x*>.
// The trailing term vanishes at an unconstrained minimizer and whenever
// grad f(x*) is normal to the feasible affine hull, which is how the identity
// is usually quoted; keeping it makes the equation exact for any anchor.
inline std::pair<double, double> strong_lyapunov_sides(const SmoothObjective& f,
                                                       const Vector& xstar,
                                                       const Vector& x,
                                                       const Vector& y) {
  const double mu = f.mu();
  const auto& phi = f.mirror();
  const Vector gpsi_x = f.grad_shifted(x);
  const Vector gpsi_s = f.grad_shifted(xstar);
  const Vector yms = sub(y, xstar);
  const double lhs = dot(sub(gpsi_x, gpsi_s), sub(x, y)) + dot(yms, gpsi_x) +
                     mu * dot(yms, phi.grad(y));
  const double rhs = f.bregman_shifted(x, xstar) + mu * phi.bregman(xstar, y) +
                     f.bregman_shifted(xstar, x) + mu * phi.bregman(y, xstar) +
                     dot(f.grad(xstar), yms);
  return {lhs, rhs};
}

inline CheckReport check_strong_lyapunov(
    const ProblemInstance& p, std::size_t samples, std::uint64_t seed,
    std::optional<Vector> xstar = std::nullopt, double tolerance = 1e-8) {
  if (!(p.f->mu() > 0.0))
    throw config_error(
        "strong Lyapunov check requires mu > 0; use the perturbed variant");
  if (!xstar) xstar = p.f->known_minimizer();
  if (!xstar)
    throw config_error(
        "strong Lyapunov check needs a minimizer; pass a reference point");
  if (xstar->size() != p.dim())
    throw config_error("strong Lyapunov check: anchor dimension mismatch");
  const Domain dom = p.f->mirror().domain();
  detail::ResidualMax acc;
  Rng rng(derive_seed(seed, 13));
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = sample_domain_point(dom, p.dim(), rng);
    const Vector y = sample_domain_point(dom, p.dim(), rng);
    const auto [lhs, rhs] = strong_lyapunov_sides(*p.f, *xstar, x, y);
    acc.add(lhs, rhs);
  }
  return acc.finish("strong-lyapunov", p.name, tolerance);
}

// Perturbed flow at weight eps (any mu, including 0):
//   -grad E_eps . G = E_eps + D_f(x*, x) + eps D_phi(y, x)
//                     - eps D_phi(x*, x) + <grad f(x*), y - x*>.
// Only divergences FROM the anchor appear, so anchors on the boundary of the
// mirror domain evaluate finitely.
inline std::pair<double, double> perturbed_lyapunov_sides(
    const SmoothObjective& f, double eps, const Vector& xstar, const Vector& x,
    const Vector& y) {
  const auto& phi = f.mirror();
  const Vector gf_x = f.grad(x);
  const Vector gf_s = f.grad(xstar);
  const Vector yms = sub(y, xstar);
  const double lhs = dot(sub(gf_x, gf_s), sub(x, y)) + dot(yms, gf_x) -
                     eps * dot(yms, sub(phi.grad(x), phi.grad(y)));
  const double rhs = f.bregman(x, xstar) + eps * phi.bregman(xstar, y) +
                     f.bregman(xstar, x) + eps * phi.bregman(y, x) -
                     eps * phi.bregman(xstar, x) + dot(gf_s, yms);
  return {lhs, rhs};
}

inline CheckReport check_perturbed_lyapunov(
    const ProblemInstance& p, double epsilon, std::size_t samples,
    std::uint64_t seed, std::optional<Vector> xstar = std::nullopt,
    double tolerance = 1e-8) {
  if (!(epsilon > 0.0))
    throw config_error("perturbed Lyapunov check: epsilon must be positive");
  if (!xstar) xstar = p.f->known_minimizer();
  if (!xstar)
    throw config_error(
        "perturbed Lyapunov check needs a minimizer; pass a reference point");
  if (xstar->size() != p.dim())
    throw config_error("perturbed Lyapunov check: anchor dimension mismatch");
  const Domain dom = p.f->mirror().domain();
  detail::ResidualMax acc;
  Rng rng(derive_seed(seed, 19));
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = sample_domain_point(dom, p.dim(), rng);
    const Vector y = sample_domain_point(dom, p.dim(), rng);
    const auto [lhs, rhs] =
        perturbed_lyapunov_sides(*p.f, epsilon, *xstar, x, y);
    acc.add(lhs, rhs);
  }
  return acc.finish("perturbed-lyapunov", p.name, tolerance);
}

// ---------------------------------------------------------------------------
// Per-step identities of the discrete schemes.

// Checked along a recorded trajectory against an arbitrary anchor z. All
// three schemes share the structure
//   E(k+1) - E(k) = -alpha E(k+1) - alpha B_z - B_k
//                   - alpha <grad f(z), y_{k+1} - z>,
// where E is the tilted energy the scheme contracts, B_z couples the anchor
// with the new pair, and B_k couples consecutive pairs. The trailing anchor
// term makes the identity exact for every z; at a minimizer it reduces to
// the usual statement. For the perturbed scheme B_z is expanded with the
// divergence TO the anchor cancelled against its twin inside the energy
// difference, so boundary anchors evaluate finitely.
inline CheckReport check_step_identity(const ProblemInstance& p,
                                       const Trace& trace,
                                       const Vector& anchor,
                                       double tolerance = 1e-8) {
  if (trace.trajectory.size() < 2)
    throw config_error("step identity check needs a recorded trajectory");
  if (trace.trajectory.front().x.size() != p.dim())
    throw config_error(
        "step identity check: trajectory/problem dimension mismatch");
  if (anchor.size() != p.dim())
    throw config_error("step identity check: anchor dimension mismatch");
  const auto alg = algorithm_from_name(trace.algorithm);
  if (!alg)
    throw config_error("step identity check: unknown algorithm " +
                       trace.algorithm);
  const bool fwd = *alg == Algorithm::accmd_forward;
  const bool bwd = *alg == Algorithm::accmd_backward ||
                   *alg == Algorithm::composite_backward;
  const bool pert =
      *alg == Algorithm::perturbed || *alg == Algorithm::homotopy;
  if (!fwd && !bwd && !pert)
    throw config_error("no per-step identity applies to " + trace.algorithm);
  if (p.g.kind == NonsmoothTerm::Kind::l1)
    throw config_error(
        "per-step identities cover the smooth and simplex-restricted updates "
        "only");

  using Base = LyapunovSuite::Base;
  // The perturbed scheme only touches the plain base, so keep the suite at
  // the native weight (boundary anchors stay usable that way).
  const LyapunovSuite suite(p.f, anchor,
                            pert ? p.f->mu() : trace.mu_used);
  const auto& phi = p.f->mirror();
  const Vector gz = p.f->grad(anchor);
  detail::ResidualMax acc;
  for (std::size_t k = 0; k + 1 < trace.trajectory.size(); ++k) {
    const auto& a = trace.trajectory[k];
    const auto& b = trace.trajectory[k + 1];
    const double al = b.alpha;
    const double anchor_term = -al * dot(gz, sub(b.y, anchor));
    double lhs = 0.0;
    double rhs = 0.0;
    if (fwd || bwd) {
      const double w = trace.mu_used;
      const double tilt = fwd ? al : -al;
      const double ek = suite.tilted_energy(Base::shifted, w, tilt, a.x, a.y);
      const double ek1 = suite.tilted_energy(Base::shifted, w, tilt, b.x, b.y);
      const double bz =
          suite.pair_energy(Base::shifted, w, -tilt, anchor, b.x, b.y, anchor);
      const double bk =
          suite.pair_energy(Base::shifted, w, tilt, a.x, b.x, b.y, a.y);
      lhs = ek1 - ek;
      rhs = -al * ek1 - al * bz - bk + anchor_term;
    } else {
      const double eps = b.epsilon;
      const double ek = suite.tilted_energy(Base::plain, eps, al, a.x, a.y);
      const double ek1 = suite.tilted_energy(Base::plain, eps, al, b.x, b.y);
      const double bk =
          suite.pair_energy(Base::plain, eps, al, a.x, b.x, b.y, a.y);
      const double dfzx = p.f->bregman(anchor, b.x);
      const Vector gx1 = p.f->grad(b.x);
      const double cross = dot(sub(gz, gx1), sub(anchor, b.y));
      lhs = ek1 - ek;
      rhs = -al * ek1 - al * eps * phi.bregman(b.y, b.x) +
            al * eps * phi.bregman(anchor, b.x) - al * (dfzx - al * cross) -
            bk + anchor_term;
    }
    acc.add(lhs, rhs);
  }
  CheckReport r = acc.finish("step-identity",
                             trace.algorithm + " on " + p.name, tolerance);
  if ((fwd || bwd) && trace.mu_used > 0.0 && trace.c_used > 0.0) {
    // Initial-energy constant of the accelerated rate bound; reported for
    // context, no canonical normalization exists across problems.
    const auto& z0 = trace.trajectory.front();
    const double tilt = fwd ? trace.alpha_used : -trace.alpha_used;
    const double e0 =
        suite.tilted_energy(Base::shifted, trace.mu_used, tilt, z0.x, z0.y);
    r.extras.emplace_back("c0", e0 * std::sqrt(trace.c_used / trace.mu_used));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Cross-curvature (generalized Cauchy-Schwarz) spot-check.

// Samples quadruples near the anchor and tests
//   |<grad psi(x) - grad psi(xh), y - yh>|
//     <= 2 sqrt(C) D_psi(x, xh)^{1/2} D_phi(yh, y)^{1/2},
// psi the shifted remainder. The residual counts only exceedance, so a
// passing report means zero violations beyond rounding. The supremum of
// lhs^2 / (4 D_psi D_phi) is a sampled lower bound on the tightest constant
// and is reported, not asserted.
//
// When the instance carries a locally certified constant (gcs.local_radius
// set), quadruples are drawn uniformly from the Euclidean ball of radius
// local_radius / 2 around the minimizer, the region the constant covers;
// wider sampling would test the constant where no bound is claimed.
inline CheckReport check_gcs(const ProblemInstance& p, std::size_t samples,
                             std::uint64_t seed,
                             std::optional<Vector> anchor = std::nullopt,
                             double radius = 0.5, double tolerance = 1e-12) {
  const Vector center = anchor ? std::move(*anchor) : reference_minimizer(p);
  if (center.size() != p.dim())
    throw config_error("gcs check: anchor dimension mismatch");
  const double c = p.gcs.value;
  const Domain dom = p.f->mirror().domain();
  const std::optional<double> ball = p.gcs.local_radius;
  Rng rng(derive_seed(seed, 17));
  auto draw = [&]() {
    if (!ball) return sample_near(dom, center, rng, radius);
    // Rejection keeps samples inside the mirror domain when the certified
    // ball touches its boundary.
    for (int attempt = 0; attempt < 64; ++attempt) {
      Vector x = sample_in_ball(center, rng, *ball / 2.0);
      bool ok = true;
      if (dom != Domain::full_space)
        for (double t : x) ok = ok && t > 0.0;
      if (ok) return x;
    }
    throw config_error("gcs check: certified ball lies outside the domain");
  };
  double abs_max = 0.0;
  double rel_max = 0.0;
  double ratio_sup = 0.0;
  std::size_t violations = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = draw();
    const Vector xh = draw();
    const Vector y = draw();
    const Vector yh = draw();
    const double lhs = std::abs(
        dot(sub(p.f->grad_shifted(x), p.f->grad_shifted(xh)), sub(y, yh)));
    const double dpsi = std::max(p.f->bregman_shifted(x, xh), 0.0);
    const double dphi = std::max(p.f->mirror().bregman(yh, y), 0.0);
    const double rhs = 2.0 * std::sqrt(c * dpsi) * std::sqrt(dphi);
    const double excess = std::max(0.0, lhs - rhs);
    abs_max = std::max(abs_max, excess);
    const double rel = excess / std::max({1.0, lhs, rhs});
    rel_max = std::max(rel_max, rel);
    if (rel > tolerance) ++violations;
    if (dpsi > 0.0 && dphi > 0.0 && std::isfinite(dphi))
      ratio_sup = std::max(ratio_sup, lhs * lhs / (4.0 * dpsi * dphi));
  }
  CheckReport r;
  r.name = "gcs";
  r.subject = p.name;
  r.samples = samples;
  r.max_abs_residual = abs_max;
  r.max_rel_residual = rel_max;
  r.tolerance = tolerance;
  r.passed = violations == 0;
  r.extras.emplace_back("violation_fraction",
                        samples == 0 ? 0.0
                                     : static_cast<double>(violations) /
                                           static_cast<double>(samples));
  r.extras.emplace_back("ratio_sup", ratio_sup);
  r.extras.emplace_back("c_used", c);
  if (ball) r.extras.emplace_back("ball_radius", *ball / 2.0);
  return r;
}

// ---------------------------------------------------------------------------
// Finite differences.

// Central-difference gradient. A domain violation (or non-finite value) at
// x +- h e_i retries that coordinate once with h/10, then gives up.
inline Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                               const Vector& x, double h) {
  if (!(h > 0.0)) throw usage_error("finite_diff_grad: h must be positive");
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double hi = h;
    for (int attempt = 0;; ++attempt) {
      Vector xp = x;
      Vector xm = x;
      xp[i] += hi;
      xm[i] -= hi;
      try {
        const double fp = f(xp);
        const double fm = f(xm);
        if (!std::isfinite(fp) || !std::isfinite(fm))
          throw domain_error("finite_diff_grad: non-finite value");
        g[i] = (fp - fm) / (2.0 * hi);
        break;
      } catch (const domain_error&) {
        if (attempt == 1) throw;
        hi /= 10.0;
      }
    }
  }
  return g;
}

inline Vector finite_diff_grad(const SmoothObjective& f, const Vector& x,
                               double h) {
  return finite_diff_grad([&f](const Vector& t) { return f.value(t); }, x, h);
}

// ---------------------------------------------------------------------------
// Aggregation.

inline bool all_passed(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    if (!r.passed) return false;
  return true;
}

// Battery used by the verify subcommand: the mirror three-point identity, the
// dissipation identities available at the instance's weights, the per-step
// identities along short recorded runs, and the cross-curvature spot-check.
inline std::vector<CheckReport> standard_checks(const ProblemInstance& p,
                                                std::size_t samples,
                                                std::uint64_t seed) {
  std::vector<CheckReport> out;
  const Vector anchor = reference_minimizer(p);
  out.push_back(check_three_point(p.f->mirror(), p.dim(), samples, seed));
  if (p.f->mu() > 0.0)
    out.push_back(check_strong_lyapunov(p, samples, seed, anchor));
  out.push_back(check_perturbed_lyapunov(p, 1e-2, samples, seed, anchor));
  if (p.g.kind != NonsmoothTerm::Kind::l1) {
    SolverConfig cfg;
    cfg.tol = 0.0;
    cfg.max_iters = samples;
    cfg.record_trajectory = true;
    if (p.f->mu() > 0.0) {
      for (Algorithm alg :
           {Algorithm::accmd_forward, Algorithm::accmd_backward}) {
        cfg.algorithm = alg;
        out.push_back(check_step_identity(p, run(p, cfg), anchor));
      }
    }
    SolverConfig pcfg = cfg;
    pcfg.algorithm = Algorithm::perturbed;
    pcfg.epsilon0 = 1e-2;
    out.push_back(check_step_identity(p, run(p, pcfg), anchor));
  }
  out.push_back(check_gcs(p, samples, seed, anchor));
  return out;
}

inline nlohmann::ordered_json check_report_json(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["check"] = r.name;
  if (!r.subject.empty()) j["subject"] = r.subject;
  j["samples"] = r.samples;
  j["max_abs_residual"] = r.max_abs_residual;
  j["max_rel_residual"] = r.max_rel_residual;
  j["tolerance"] = r.tolerance;
  j["passed"] = r.passed;
  for (const auto& [key, value] : r.extras) j[key] = value;
  return j;
}

inline nlohmann::ordered_json check_reports_json(
    const std::vector<CheckReport>& reports) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(check_report_json(r));
  j["checks"] = std::move(arr);
  j["all_passed"] = all_passed(reports);
  return j;
}

}  // namespace accmd
