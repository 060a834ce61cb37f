#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "accmd/common.hpp"
#include "accmd/linalg.hpp"
#include "accmd/mirror.hpp"
#include "accmd/nonsmooth.hpp"
#include "accmd/rng.hpp"

namespace accmd {

// A smooth objective together with the relative-convexity metadata that the
// solvers consume: mu and L satisfy mu * D_phi <= D_f <= L * D_phi on the
// domain, both taken relative to the attached mirror function.
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;

  virtual double value(const Vector& x) const = 0;
  virtual Vector grad(const Vector& x) const = 0;
  virtual double mu() const = 0;
  virtual double smoothness() const = 0;  // L
  virtual std::size_t dim() const = 0;
  virtual const char* name() const = 0;

  const MirrorFunction& mirror() const { return *mirror_; }
  MirrorPtr mirror_ptr() const { return mirror_; }

  virtual std::optional<Vector> known_minimizer() const { return std::nullopt; }

  // The shifted remainder f - mu * phi. It is convex, and its gradient is what
  // the accelerated forward scheme extrapolates. Overridden by families where
  // a closed form avoids cancellation between f and phi.
  virtual double value_shifted(const Vector& x) const {
    const double m = mu();
    return m == 0.0 ? value(x) : value(x) - m * mirror().value(x);
  }

  virtual Vector grad_shifted(const Vector& x) const {
    Vector g = grad(x);
    const double m = mu();
    if (m != 0.0) axpy(-m, mirror().grad(x), g);
    return g;
  }

  double bregman(const Vector& x, const Vector& y) const {
    return value(x) - value(y) - dot(grad(y), sub(x, y));
  }

  double bregman_shifted(const Vector& x, const Vector& y) const {
    return value_shifted(x) - value_shifted(y) -
           dot(grad_shifted(y), sub(x, y));
  }

  // Closed-form cross-curvature constant, where one exists.
  virtual std::optional<double> exact_gcs_constant() const {
    return std::nullopt;
  }

  // Radius of the Euclidean ball around the minimizer on which the exact
  // constant is certified; empty when the constant holds globally.
  virtual std::optional<double> gcs_certified_radius() const {
    return std::nullopt;
  }

  // Symmetric PSD operator whose largest eigenvalue equals the exact
  // cross-curvature constant, for families whose shifted part is quadratic.
  virtual std::optional<std::function<Vector(const Vector&)>> gcs_operator()
      const {
    return std::nullopt;
  }

 protected:
  explicit SmoothObjective(MirrorPtr mirror) : mirror_(std::move(mirror)) {
    if (!mirror_) throw config_error("objective requires a mirror function");
  }

  MirrorPtr mirror_;
};

using ObjectivePtr = std::shared_ptr<const SmoothObjective>;

// ---------------------------------------------------------------------------
// Cross-curvature constant C. The solvers size their momentum parameter as
// sqrt(mu / C) (or sqrt(epsilon / C) in the perturbed regime), so the method
// used to obtain C is recorded alongside the value.

enum class GcsMethod { exact_formula, power_method, practical_adaptive, global_l };

struct GcsEstimate {
  double value = 0.0;
  GcsMethod method = GcsMethod::global_l;
  bool converged = true;
  int iterations = 0;
  // Set when `value` is certified only on the Euclidean ball of radius
  // local_radius/2 around the minimizer (spot-checks must sample there).
  std::optional<double> local_radius;
};

struct GcsParams {
  double radius = 1.0;   // ball radius entering the adaptive bound
  double theta = 1.0;    // Holder exponent of the mirror Hessian
  std::optional<double> hessian_holder;  // Holder constant of grad^2 phi
  double gap = 0.0;      // current ||x_k - y_k||
  double tol = 1e-10;
  int max_iters = 20000;
  std::uint64_t seed = 0;
};

inline const char* gcs_method_name(GcsMethod m) {
  switch (m) {
    case GcsMethod::exact_formula: return "exact";
    case GcsMethod::power_method: return "power";
    case GcsMethod::practical_adaptive: return "practical";
    case GcsMethod::global_l: return "global-L";
  }
  return "?";
}

inline GcsEstimate estimate_gcs(const SmoothObjective& f, GcsMethod method,
                                const GcsParams& params = {}) {
  switch (method) {
    case GcsMethod::exact_formula: {
      const auto c = f.exact_gcs_constant();
      if (!c)
        throw config_error(std::string("no exact curvature formula for ") +
                           f.name());
      return {*c, method, true, 0, f.gcs_certified_radius()};
    }
    case GcsMethod::power_method: {
      const auto op = f.gcs_operator();
      if (!op)
        throw config_error(
            std::string("power-method estimator needs quadratic shifted "
                        "structure, unavailable for ") +
            f.name());
      const auto pr = power_method(*op, f.dim(), params.tol, params.max_iters,
                                   params.seed);
      return {pr.value, method, pr.converged, pr.iterations, {}};
    }
    case GcsMethod::practical_adaptive: {
      double holder;
      if (params.hessian_holder) {
        holder = *params.hessian_holder;
      } else if (dynamic_cast<const QuadraticMirror*>(&f.mirror()) != nullptr) {
        holder = 0.0;  // quadratic mirrors have a constant Hessian
      } else {
        throw config_error(
            "practical-adaptive estimator needs the Holder constant of the "
            "mirror Hessian for non-quadratic mirrors");
      }
      const double base = f.smoothness() - f.mu();
      const double value =
          base * (1.0 + holder * std::pow(params.gap, params.theta));
      return {value, method, true, 0, {}};
    }
    case GcsMethod::global_l:
      return {f.smoothness(), method, true, 0, {}};
  }
  throw config_error("unknown curvature estimation method");
}

// ---------------------------------------------------------------------------

struct ProblemInstance {
  std::string name;
  ObjectivePtr f;
  NonsmoothTerm g;
  GcsEstimate gcs;
  std::uint64_t seed = 0;

  std::size_t dim() const { return f->dim(); }

  double composite_value(const Vector& x) const {
    return f->value(x) + g.value(x);
  }

  bool on_simplex() const {
    return f->mirror().domain() == Domain::simplex &&
           g.kind == NonsmoothTerm::Kind::simplex_indicator;
  }
};

// ---------------------------------------------------------------------------
// Entropy-regularized quadratic over the simplex:
//   f(x) = sum_i x_i log x_i + 1/2 (g^T x)^2.
// Relative to the entropy mirror, mu = 1 and L = 1 + max_i g_i^2; the shifted
// remainder is the rank-one quadratic 1/2 (g^T x)^2, whose cross-curvature
// constant is exactly ||g||_2^2.

class LogLinearObjective final : public SmoothObjective {
 public:
  explicit LogLinearObjective(Vector gvec)
      : SmoothObjective(std::make_shared<EntropyMirror>(
            gvec.size(), EntropyMirror::Mode::simplex_restricted)),
        gvec_(std::move(gvec)) {
    double max_sq = 0.0;
    norm_sq_ = 0.0;
    for (double t : gvec_) {
      max_sq = std::max(max_sq, t * t);
      norm_sq_ += t * t;
    }
    if (norm_sq_ == 0.0)
      throw config_error("log-linear: coupling vector must be nonzero");
    smoothness_ = 1.0 + max_sq;
  }

  double value(const Vector& x) const override {
    const double t = dot(gvec_, x);
    return mirror().value(x) + 0.5 * t * t;
  }

  Vector grad(const Vector& x) const override {
    Vector g = mirror().grad(x);
    axpy(dot(gvec_, x), gvec_, g);
    return g;
  }

  double value_shifted(const Vector& x) const override {
    const double t = dot(gvec_, x);
    return 0.5 * t * t;
  }

  Vector grad_shifted(const Vector& x) const override {
    return scaled(dot(gvec_, x), gvec_);
  }

  double mu() const override { return 1.0; }
  double smoothness() const override { return smoothness_; }
  std::size_t dim() const override { return gvec_.size(); }
  const char* name() const override { return "loglinear"; }

  std::optional<double> exact_gcs_constant() const override {
    return norm_sq_;
  }

  std::optional<std::function<Vector(const Vector&)>> gcs_operator()
      const override {
    const Vector g = gvec_;
    return [g](const Vector& v) { return scaled(dot(g, v), g); };
  }

  const Vector& coupling() const { return gvec_; }

 private:
  Vector gvec_;
  double norm_sq_ = 0.0;
  double smoothness_ = 0.0;
};

// ---------------------------------------------------------------------------
// Quadratic over the simplex: f(x) = b^T x + 1/2 x^T A x with A SPD.
// Relative to entropy, mu = 0; the cross-curvature constant is lambda_max(A).

class MaxMarginObjective final : public SmoothObjective {
 public:
  MaxMarginObjective(DenseMatrix a, Vector b, std::uint64_t seed)
      : SmoothObjective(std::make_shared<EntropyMirror>(
            b.size(), EntropyMirror::Mode::simplex_restricted)),
        a_(std::move(a)),
        b_(std::move(b)) {
    if (a_.rows != a_.cols || a_.rows != b_.size())
      throw config_error("max-margin: A must be square and match b");
    auto chol = cholesky(a_);
    if (!chol)
      throw config_error("max-margin: A is not symmetric positive definite");
    auto pr = power_method([this](const Vector& v) { return matvec(a_, v); },
                           b_.size(), 1e-12, 20000, derive_seed(seed, 1));
    lambda_max_ = pr.value;
    power_converged_ = pr.converged;
    power_iterations_ = pr.iterations;

    solve_simplex_kkt();
  }

  double value(const Vector& x) const override {
    return dot(b_, x) + 0.5 * dot(x, matvec(a_, x));
  }

  Vector grad(const Vector& x) const override {
    Vector g = matvec(a_, x);
    axpy(1.0, b_, g);
    return g;
  }

  double mu() const override { return 0.0; }
  double smoothness() const override { return lambda_max_; }
  std::size_t dim() const override { return b_.size(); }
  const char* name() const override { return "maxmargin"; }

  std::optional<std::function<Vector(const Vector&)>> gcs_operator()
      const override {
    return [this](const Vector& v) { return matvec(a_, v); };
  }

  std::optional<Vector> known_minimizer() const override { return minimizer_; }

  const DenseMatrix& quadratic() const { return a_; }
  const Vector& linear() const { return b_; }
  double lambda_max() const { return lambda_max_; }
  bool power_converged() const { return power_converged_; }
  int power_iterations() const { return power_iterations_; }

 private:
  // Active-set solve of min b'x + x'Ax/2 over the simplex. Stationarity on
  // the current support S reads A_SS x_S + b_S = c 1 with sum(x_S) = 1, so
  // x_S = c u - v with u = A_SS^{-1} 1, v = A_SS^{-1} b_S. The most negative
  // component leaves S until x_S > 0; KKT certification (gradient >= c off
  // the support) then makes the point the exact minimizer. The certificate
  // can fail only through degeneracy, in which case no minimizer is stored.
  void solve_simplex_kkt() {
    const std::size_t n = b_.size();
    std::vector<std::size_t> support(n);
    for (std::size_t i = 0; i < n; ++i) support[i] = i;
    for (std::size_t round = 0; round < n && !support.empty(); ++round) {
      const std::size_t m = support.size();
      DenseMatrix as(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) as(i, j) = a_(support[i], support[j]);
      auto chol = cholesky(as);
      if (!chol) return;
      Vector bs(m);
      for (std::size_t i = 0; i < m; ++i) bs[i] = b_[support[i]];
      Vector u = cholesky_solve(*chol, Vector(m, 1.0));
      Vector v = cholesky_solve(*chol, bs);
      double su = 0.0, sv = 0.0;
      for (double t : u) su += t;
      for (double t : v) sv += t;
      const double c = (1.0 + sv) / su;
      Vector xs(m);
      std::size_t drop = m;
      for (std::size_t i = 0; i < m; ++i) {
        xs[i] = c * u[i] - v[i];
        if (xs[i] <= 0.0 && (drop == m || xs[i] < xs[drop])) drop = i;
      }
      if (drop < m) {
        support.erase(support.begin() + static_cast<std::ptrdiff_t>(drop));
        continue;
      }
      Vector x(n, 0.0);
      for (std::size_t i = 0; i < m; ++i) x[support[i]] = xs[i];
      Vector g = matvec(a_, x);
      axpy(1.0, b_, g);
      const double slack = 1e-10 * std::max(1.0, std::abs(c));
      for (double gi : g)
        if (gi < c - slack) return;
      minimizer_ = std::move(x);
      return;
    }
  }

  DenseMatrix a_;
  Vector b_;
  double lambda_max_ = 0.0;
  bool power_converged_ = false;
  int power_iterations_ = 0;
  std::optional<Vector> minimizer_;
};

// ---------------------------------------------------------------------------
// Quartic objective in the quartic mirror geometry:
//   f(x) = 1/4 ||Ex||_2^4 + 1/4 ||Ax - b||_4^4 + 1/2 ||Cx - d||_2^2.
// mu = min(lambda_min(E)^4 / 3, lambda_min(C)^2);
// L  = (3 ||E||^4 + 3 ||A||^4) + 6 ||A||^3 ||b|| + 3 ||A||^2 ||b||^2 + ||C||^2
// (the unit-radius smoothness bound; spectral norms throughout).

class QuarticObjective final : public SmoothObjective {
 public:
  QuarticObjective(DenseMatrix e, DenseMatrix a, DenseMatrix c, Vector b,
                   Vector d, std::uint64_t seed)
      : SmoothObjective(std::make_shared<QuarticMirror>(d.size())),
        e_(std::move(e)),
        a_(std::move(a)),
        c_(std::move(c)),
        b_(std::move(b)),
        d_(std::move(d)) {
    const std::size_t n = d_.size();
    if (e_.cols != n || a_.cols != n || c_.cols != n || a_.rows != b_.size() ||
        c_.rows != d_.size())
      throw config_error("quartic: inconsistent dimensions");

    const double norm_e = spectral_norm(e_, derive_seed(seed, 2));
    const double norm_a = spectral_norm(a_, derive_seed(seed, 3));
    const double norm_c = spectral_norm(c_, derive_seed(seed, 4));
    const double nb = norm_l2(b_);
    smoothness_ = 3.0 * std::pow(norm_e, 4) + 3.0 * std::pow(norm_a, 4) +
                  6.0 * std::pow(norm_a, 3) * nb + 3.0 * norm_a * norm_a * nb * nb +
                  norm_c * norm_c;

    const double lam_e =
        inverse_power_method(e_, 1e-8, 20000, derive_seed(seed, 5)).value;
    const double lam_c =
        inverse_power_method(c_, 1e-8, 20000, derive_seed(seed, 6)).value;
    mu_ = std::min(std::pow(lam_e, 4) / 3.0, lam_c * lam_c);
  }

  double value(const Vector& x) const override {
    const Vector ex = matvec(e_, x);
    const double ex2 = dot(ex, ex);
    Vector r = matvec(a_, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b_[i];
    double quart = 0.0;
    for (double t : r) {
      const double t2 = t * t;
      quart += t2 * t2;
    }
    Vector s = matvec(c_, x);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] -= d_[i];
    return 0.25 * ex2 * ex2 + 0.25 * quart + 0.5 * dot(s, s);
  }

  Vector grad(const Vector& x) const override {
    const Vector ex = matvec(e_, x);
    Vector g = matvec_transposed(e_, scaled(dot(ex, ex), ex));
    Vector r = matvec(a_, x);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double t = r[i] - b_[i];
      r[i] = t * t * t;
    }
    axpy(1.0, matvec_transposed(a_, r), g);
    Vector s = matvec(c_, x);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] -= d_[i];
    axpy(1.0, matvec_transposed(c_, s), g);
    return g;
  }

  double mu() const override { return mu_; }
  double smoothness() const override { return smoothness_; }
  std::size_t dim() const override { return d_.size(); }
  const char* name() const override { return "quartic"; }

  const DenseMatrix& e() const { return e_; }
  const DenseMatrix& a() const { return a_; }
  const DenseMatrix& c() const { return c_; }
  const Vector& b() const { return b_; }
  const Vector& d() const { return d_; }

 private:
  static double spectral_norm(const DenseMatrix& m, std::uint64_t seed) {
    const auto pr = power_method(
        [&m](const Vector& v) { return matvec_transposed(m, matvec(m, v)); },
        m.cols, 1e-12, 20000, seed);
    return std::sqrt(std::max(pr.value, 0.0));
  }

  DenseMatrix e_, a_, c_;
  Vector b_, d_;
  double mu_ = 0.0;
  double smoothness_ = 0.0;
};

// ---------------------------------------------------------------------------
// Least squares with an l1 penalty, in the diagonally preconditioned
// quadratic geometry phi(x) = 1/2 x^T D x, D = diag(A^T A). The
// cross-curvature constant equals the spectral radius of the normalized Gram
// operator D^{-1/2} A^T A D^{-1/2}; mu = 0 in the over-parameterized regime.

class LeastSquaresObjective final : public SmoothObjective {
 public:
  LeastSquaresObjective(DenseMatrix a, Vector b, std::uint64_t seed)
      : SmoothObjective(make_mirror(a)), a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows != b_.size())
      throw config_error("least squares: rows of A must match b");
    const auto& d =
        static_cast<const QuadraticMirror&>(mirror()).diag().diagonal;
    scale_.resize(d.size());
    for (std::size_t j = 0; j < d.size(); ++j)
      scale_[j] = 1.0 / std::sqrt(d[j]);
    auto pr = power_method(
        [this](const Vector& v) {
          Vector w(v.size());
          for (std::size_t j = 0; j < v.size(); ++j) w[j] = scale_[j] * v[j];
          Vector z = matvec_transposed(a_, matvec(a_, w));
          for (std::size_t j = 0; j < z.size(); ++j) z[j] *= scale_[j];
          return z;
        },
        a_.cols, 1e-12, 20000, derive_seed(seed, 7));
    rho_ = pr.value;
    power_converged_ = pr.converged;
    power_iterations_ = pr.iterations;
  }

  double value(const Vector& x) const override {
    Vector r = matvec(a_, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b_[i];
    return 0.5 * dot(r, r);
  }

  Vector grad(const Vector& x) const override {
    Vector r = matvec(a_, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b_[i];
    return matvec_transposed(a_, r);
  }

  double mu() const override { return 0.0; }
  double smoothness() const override { return rho_; }
  std::size_t dim() const override { return a_.cols; }
  const char* name() const override { return "lasso"; }

  std::optional<std::function<Vector(const Vector&)>> gcs_operator()
      const override {
    return [this](const Vector& v) {
      Vector w(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) w[j] = scale_[j] * v[j];
      Vector z = matvec_transposed(a_, matvec(a_, w));
      for (std::size_t j = 0; j < z.size(); ++j) z[j] *= scale_[j];
      return z;
    };
  }

  const DenseMatrix& design() const { return a_; }
  const Vector& response() const { return b_; }
  bool power_converged() const { return power_converged_; }

 private:
  static MirrorPtr make_mirror(const DenseMatrix& a) {
    Vector d(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = 0; j < a.cols; ++j) d[j] += a(i, j) * a(i, j);
    for (std::size_t j = 0; j < a.cols; ++j)
      if (!(d[j] > 0.0))
        throw config_error("least squares: design matrix has a zero column");
    return std::make_shared<QuadraticMirror>(DiagonalMatrix{std::move(d)});
  }

  DenseMatrix a_;
  Vector b_;
  Vector scale_;  // D^{-1/2}
  double rho_ = 0.0;
  bool power_converged_ = false;
  int power_iterations_ = 0;
};

// ---------------------------------------------------------------------------
// One-dimensional objective on x > 0 whose shifted remainder stays bounded at
// the domain boundary even though the Euclidean Hessian blows up:
//   f(x) = 2 x log x           for x <= 1,
//   f(x) = x log x + 2x - log x - 2  for x > 1,
// with phi = x log x, mu = 1, L = 2, minimizer x = 1/e.

class BoundaryExampleObjective final : public SmoothObjective {
 public:
  BoundaryExampleObjective()
      : SmoothObjective(std::make_shared<EntropyMirror>(
            1, EntropyMirror::Mode::positive_orthant)) {}

  double value(const Vector& x) const override {
    const double t = scalar(x);
    return t <= 1.0 ? 2.0 * t * std::log(t)
                    : t * std::log(t) + 2.0 * t - std::log(t) - 2.0;
  }

  Vector grad(const Vector& x) const override {
    const double t = scalar(x);
    return {t <= 1.0 ? 2.0 * (std::log(t) + 1.0)
                     : std::log(t) + 3.0 - 1.0 / t};
  }

  double value_shifted(const Vector& x) const override {
    const double t = scalar(x);
    return t <= 1.0 ? t * std::log(t) : 2.0 * t - std::log(t) - 2.0;
  }

  Vector grad_shifted(const Vector& x) const override {
    const double t = scalar(x);
    return {t <= 1.0 ? std::log(t) + 1.0 : 2.0 - 1.0 / t};
  }

  double mu() const override { return 1.0; }
  double smoothness() const override { return 2.0; }
  std::size_t dim() const override { return 1; }
  const char* name() const override { return "counterexample"; }

  std::optional<Vector> known_minimizer() const override {
    return Vector{std::exp(-1.0)};
  }

  // No global cross-curvature constant exists: the shifted gradient log x + 1
  // diverges as x -> 0 while the divergence from any fixed point stays
  // bounded. On the ball of radius R/2 = 1/(2e) around the minimizer the
  // curvature bound 3((L - mu) + 2 sup|psi'''| R) applies with
  // sup|psi'''| = (2e)^2, giving C = 3(1 + 8e).
  std::optional<double> exact_gcs_constant() const override {
    return 3.0 * (1.0 + 8.0 * std::exp(1.0));
  }

  std::optional<double> gcs_certified_radius() const override {
    return std::exp(-1.0);
  }

 private:
  static double scalar(const Vector& x) {
    if (x.size() != 1)
      throw usage_error("1-d objective evaluated on a vector");
    if (!(x[0] > 0.0))
      throw domain_error("1-d objective requires x > 0");
    return x[0];
  }
};

// ---------------------------------------------------------------------------
// Generators. Every generator draws from the shared seeded stream in a fixed
// order, so instances are byte-reproducible for a given seed.

inline ProblemInstance make_log_linear(Vector g_vec, std::uint64_t seed = 0) {
  auto f = std::make_shared<LogLinearObjective>(std::move(g_vec));
  GcsEstimate gcs{*f->exact_gcs_constant(), GcsMethod::exact_formula, true, 0,
                  {}};
  return {"loglinear", f, NonsmoothTerm::simplex(), gcs, seed};
}

inline ProblemInstance make_log_linear(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return make_log_linear(rng.gaussian_vector(dim), seed);
}

inline ProblemInstance make_max_margin(DenseMatrix a, Vector b,
                                       std::uint64_t seed = 0) {
  auto f = std::make_shared<MaxMarginObjective>(std::move(a), std::move(b), seed);
  GcsEstimate gcs{f->lambda_max(), GcsMethod::power_method,
                  f->power_converged(), f->power_iterations(), {}};
  return {"maxmargin", f, NonsmoothTerm::simplex(), gcs, seed};
}

// A = I + M M^T / n with M standard normal keeps A well conditioned. The
// linear term at this scale typically puts the minimizer on a face of the
// simplex, which is the regime where the perturbation floor is active.
inline ProblemInstance make_max_margin(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix m(dim, dim);
  for (auto& t : m.a) t = rng.gaussian();
  DenseMatrix a = gram_outer(m);
  const double inv_n = 1.0 / static_cast<double>(dim);
  for (auto& t : a.a) t *= inv_n;
  for (std::size_t i = 0; i < dim; ++i) a(i, i) += 1.0;
  Vector b(dim);
  for (auto& t : b) t = 0.1 * rng.gaussian();
  return make_max_margin(std::move(a), std::move(b), seed);
}

inline ProblemInstance make_quartic(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  DenseMatrix a(n, n);
  for (auto& t : a.a) t = inv_sqrt_n * rng.gaussian();
  DenseMatrix c0(n, n);
  for (auto& t : c0.a) t = rng.gaussian();
  DenseMatrix e0(n, n);
  for (auto& t : e0.a) t = rng.gaussian();
  const double inv_n = 1.0 / static_cast<double>(n);
  DenseMatrix c = gram_outer(c0);
  for (auto& t : c.a) t *= inv_n;
  for (std::size_t i = 0; i < n; ++i) c(i, i) += 1.0;
  DenseMatrix e = gram_outer(e0);
  for (auto& t : e.a) t *= inv_n;
  for (std::size_t i = 0; i < n; ++i) e(i, i) += 2.0;
  Vector b(n, 0.0);
  Vector d = rng.uniform_vector(n);

  auto f = std::make_shared<QuarticObjective>(std::move(e), std::move(a),
                                              std::move(c), std::move(b),
                                              std::move(d), seed);
  GcsEstimate gcs{f->smoothness(), GcsMethod::global_l, true, 0, {}};
  return {"quartic", f, NonsmoothTerm::zero(), gcs, seed};
}

inline ProblemInstance make_lasso(DenseMatrix a, Vector b, double lambda,
                                  std::uint64_t seed = 0) {
  if (!(lambda > 0.0)) throw config_error("lasso: lambda must be positive");
  auto f =
      std::make_shared<LeastSquaresObjective>(std::move(a), std::move(b), seed);
  GcsEstimate gcs{f->smoothness(), GcsMethod::power_method,
                  f->power_converged(), 0, {}};
  return {"lasso", f, NonsmoothTerm::l1(lambda), gcs, seed};
}

// Over-parameterized instance: dense normal design, a sparse +-1 ground truth
// on ceil(cols/10) coordinates, and small additive noise on the response.
inline ProblemInstance make_lasso(std::size_t rows, std::size_t cols,
                                  std::uint64_t seed, double lambda) {
  Rng rng(seed);
  DenseMatrix a(rows, cols);
  for (auto& t : a.a) t = rng.gaussian();
  Vector truth(cols, 0.0);
  const std::size_t support = std::max<std::size_t>(1, cols / 10);
  std::size_t placed = 0;
  while (placed < support) {
    const auto j = static_cast<std::size_t>(rng.uniform() *
                                            static_cast<double>(cols));
    if (j >= cols || truth[j] != 0.0) continue;
    truth[j] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    ++placed;
  }
  Vector b = matvec(a, truth);
  for (auto& t : b) t += 0.01 * rng.gaussian();
  return make_lasso(std::move(a), std::move(b), lambda, seed);
}

inline ProblemInstance make_counterexample_1d() {
  auto f = std::make_shared<BoundaryExampleObjective>();
  GcsEstimate gcs{*f->exact_gcs_constant(), GcsMethod::exact_formula, true, 0,
                  f->gcs_certified_radius()};
  return {"counterexample", f, NonsmoothTerm::zero(), gcs, 0};
}

}  // namespace accmd
