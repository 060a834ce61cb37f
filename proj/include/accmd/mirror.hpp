#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <variant>

#include "accmd/common.hpp"
#include "accmd/linalg.hpp"
#include "accmd/nonsmooth.hpp"

namespace accmd {

enum class Domain { full_space, positive_orthant, simplex };

// A Legendre-type mirror function phi: strictly convex, differentiable on the
// interior of its domain, with an invertible gradient map. grad maps a primal
// point x to its dual chi = grad phi(x); grad_conjugate inverts that map.
class MirrorFunction {
 public:
  virtual ~MirrorFunction() = default;

  virtual double value(const Vector& x) const = 0;
  virtual Vector grad(const Vector& x) const = 0;
  virtual Vector grad_conjugate(const Vector& chi) const = 0;
  virtual Domain domain() const = 0;
  virtual const char* name() const = 0;

  // Fenchel conjugate value; the default evaluates <chi, x> - phi(x) at the
  // maximizer x = grad_conjugate(chi), which is exact for Legendre functions.
  virtual double conjugate_value(const Vector& chi) const {
    const Vector x = grad_conjugate(chi);
    return dot(chi, x) - value(x);
  }

  // D_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>.
  virtual double bregman(const Vector& x, const Vector& y) const {
    return value(x) - value(y) - dot(grad(y), sub(x, y));
  }

  // D_{phi*}(eta, chi) in the dual; equals bregman(x, y) when chi = grad(x)
  // and eta = grad(y).
  double bregman_conjugate(const Vector& eta, const Vector& chi) const {
    return conjugate_value(eta) - conjugate_value(chi) -
           dot(grad_conjugate(chi), sub(eta, chi));
  }
};

using MirrorPtr = std::shared_ptr<const MirrorFunction>;

// ---------------------------------------------------------------------------
// phi(x) = 1/2 x^T M x with M SPD (diagonal or dense). Self-dual geometry up
// to the metric: grad = M x, grad_conjugate = M^{-1} chi.

class QuadraticMirror final : public MirrorFunction {
 public:
  explicit QuadraticMirror(DiagonalMatrix metric) : metric_(std::move(metric)) {
    for (double d : diag().diagonal)
      if (!(d > 0.0))
        throw config_error("quadratic mirror: diagonal metric must be > 0");
  }

  explicit QuadraticMirror(DenseMatrix metric) {
    auto l = cholesky(metric);
    if (!l) throw config_error("quadratic mirror: metric is not SPD");
    chol_ = std::move(*l);
    metric_ = std::move(metric);
  }

  double value(const Vector& x) const override {
    return 0.5 * dot(x, apply_metric(x));
  }

  Vector grad(const Vector& x) const override { return apply_metric(x); }

  Vector grad_conjugate(const Vector& chi) const override {
    if (is_diagonal()) {
      const Vector& d = diag().diagonal;
      check_same_dim(d, chi, "quadratic grad_conjugate");
      Vector x(chi.size());
      for (std::size_t i = 0; i < chi.size(); ++i) x[i] = chi[i] / d[i];
      return x;
    }
    return cholesky_solve(chol_, chi);
  }

  double conjugate_value(const Vector& chi) const override {
    return 0.5 * dot(chi, grad_conjugate(chi));
  }

  Domain domain() const override { return Domain::full_space; }
  const char* name() const override { return "quadratic"; }

  bool is_diagonal() const {
    return std::holds_alternative<DiagonalMatrix>(metric_);
  }
  const DiagonalMatrix& diag() const {
    return std::get<DiagonalMatrix>(metric_);
  }

 private:
  Vector apply_metric(const Vector& x) const {
    return is_diagonal() ? matvec(diag(), x)
                         : matvec(std::get<DenseMatrix>(metric_), x);
  }

  std::variant<DiagonalMatrix, DenseMatrix> metric_;
  DenseMatrix chol_;  // lower factor, dense metric only
};

// ---------------------------------------------------------------------------
// Negative entropy phi(x) = sum x_i log x_i on the positive orthant. The
// Bregman divergence is the (unnormalized) KL divergence, and on the simplex
// the induced prox is the normalized exponential update. value() extends
// continuously to entries equal to 0; grad() requires strict positivity.

class EntropyMirror final : public MirrorFunction {
 public:
  enum class Mode { positive_orthant, simplex_restricted };

  EntropyMirror(std::size_t dim, Mode mode) : dim_(dim), mode_(mode) {}

  double value(const Vector& x) const override {
    double s = 0.0;
    for (double t : x) {
      if (t < 0.0) throw domain_error("entropy: negative entry");
      if (t > 0.0) s += t * std::log(t);
    }
    return s;
  }

  Vector grad(const Vector& x) const override {
    Vector chi(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] > 0.0)) throw domain_error("entropy grad: entry must be > 0");
      chi[i] = std::log(x[i]) + 1.0;
    }
    return chi;
  }

  Vector grad_conjugate(const Vector& chi) const override {
    Vector x(chi.size());
    for (std::size_t i = 0; i < chi.size(); ++i) x[i] = std::exp(chi[i] - 1.0);
    return x;
  }

  double conjugate_value(const Vector& chi) const override {
    double s = 0.0;
    for (double t : chi) s += std::exp(t - 1.0);
    return s;
  }

  // Unnormalized KL, sum of termwise nonnegative parts; exact zero at x == y.
  // y entries may be zero: a term with x_i > 0 then diverges to +inf, while
  // x_i = 0 contributes y_i, so divergences against boundary points are exact.
  double bregman(const Vector& x, const Vector& y) const override {
    check_same_dim(x, y, "entropy bregman");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < 0.0 || y[i] < 0.0)
        throw domain_error("entropy bregman: point outside domain");
      if (x[i] > 0.0) s += x[i] * std::log(x[i] / y[i]) - x[i] + y[i];
      else s += y[i];
    }
    return s;
  }

  Domain domain() const override {
    return mode_ == Mode::simplex_restricted ? Domain::simplex
                                             : Domain::positive_orthant;
  }
  const char* name() const override { return "entropy"; }

  std::size_t dim() const { return dim_; }
  Mode mode() const { return mode_; }

 private:
  std::size_t dim_;
  Mode mode_;
};

// ---------------------------------------------------------------------------
// phi(x) = 1/4 ||x||^4 + 1/2 ||x||^2, the reference geometry for objectives
// whose Hessian grows quadratically. grad(x) = (||x||^2 + 1) x. The inverse
// map reduces to one scalar cubic: with s = ||chi|| and r the unique real
// root of r^3 + r = s, x = chi / (r^2 + 1).

class QuarticMirror final : public MirrorFunction {
 public:
  explicit QuarticMirror(std::size_t dim) : dim_(dim) {}

  double value(const Vector& x) const override {
    const double n2 = dot(x, x);
    return 0.25 * n2 * n2 + 0.5 * n2;
  }

  Vector grad(const Vector& x) const override {
    return scaled(dot(x, x) + 1.0, x);
  }

  Vector grad_conjugate(const Vector& chi) const override {
    const double s = norm_l2(chi);
    if (s == 0.0) return Vector(chi.size(), 0.0);
    const double r = cubic_root(s);
    return scaled(1.0 / (r * r + 1.0), chi);
  }

  Domain domain() const override { return Domain::full_space; }
  const char* name() const override { return "quartic"; }

  std::size_t dim() const { return dim_; }

  // Unique real root of r^3 + r - s = 0 for s >= 0. Newton from r0 = s^{1/3}
  // safeguarded by the bracket [0, max(1, s)]; the residual is monotone in r
  // so the bracket shrinks every iteration. Terminates when the update is at
  // relative machine scale.
  static double cubic_root(double s) {
    double lo = 0.0;
    double hi = std::max(1.0, s);
    double r = std::cbrt(s);
    r = std::min(std::max(r, lo), hi);
    for (int it = 0; it < 200; ++it) {
      const double f = (r * r + 1.0) * r - s;
      if (f > 0.0) hi = r;
      else if (f < 0.0) lo = r;
      else return r;
      const double df = 3.0 * r * r + 1.0;
      double next = r - f / df;
      if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
      if (std::fabs(next - r) <= 1e-14 * std::max(1.0, r)) return next;
      r = next;
    }
    return r;
  }

 private:
  std::size_t dim_;
};

// ---------------------------------------------------------------------------
// Prox steps. mirror_prox solves min_y (1+alpha) phi(y) - <h, y>, whose
// optimality condition is (1+alpha) grad phi(y) = h. composite_prox adds
// beta * g(y) for the supported (phi, g) pairs.

inline Vector mirror_prox(const MirrorFunction& phi, double alpha,
                          const Vector& h) {
  if (!(alpha > -1.0)) throw config_error("mirror_prox: requires alpha > -1");
  return phi.grad_conjugate(scaled(1.0 / (1.0 + alpha), h));
}

// log(sum_i exp(z_i)) with max-shift stabilization; finite for any finite z.
inline double stable_log_sum_exp(const Vector& z) {
  double zmax = -std::numeric_limits<double>::infinity();
  for (double t : z) zmax = std::max(zmax, t);
  double sum = 0.0;
  for (double t : z) sum += std::exp(t - zmax);
  return zmax + std::log(sum);
}

// Normalized exponential of z with log-sum-exp stabilization; the result lies
// exactly on the simplex up to one rounding in the final division.
inline Vector stable_softmax(const Vector& z) {
  double zmax = -std::numeric_limits<double>::infinity();
  for (double t : z) zmax = std::max(zmax, t);
  Vector y(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    y[i] = std::exp(z[i] - zmax);
    sum += y[i];
  }
  for (auto& t : y) t /= sum;
  return y;
}

inline Vector composite_prox(const MirrorFunction& phi, double alpha,
                             double beta, const Vector& h,
                             const NonsmoothTerm& g) {
  if (g.is_zero()) return mirror_prox(phi, alpha, h);

  if (g.kind == NonsmoothTerm::Kind::l1) {
    const auto* quad = dynamic_cast<const QuadraticMirror*>(&phi);
    if (quad == nullptr || !quad->is_diagonal())
      throw config_error(
          "composite_prox: l1 term requires a diagonal quadratic mirror");
    const Vector& d = quad->diag().diagonal;
    check_same_dim(d, h, "composite_prox l1");
    const double shrink = beta * g.lambda;
    Vector y(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double m = std::fabs(h[i]) - shrink;
      y[i] = m > 0.0 ? std::copysign(m, h[i]) / ((1.0 + alpha) * d[i]) : 0.0;
    }
    return y;
  }

  if (g.kind == NonsmoothTerm::Kind::simplex_indicator) {
    if (dynamic_cast<const EntropyMirror*>(&phi) == nullptr)
      throw config_error(
          "composite_prox: simplex indicator requires the entropy mirror");
    return stable_softmax(scaled(1.0 / (1.0 + alpha), h));
  }

  throw config_error("composite_prox: unsupported (mirror, nonsmooth) pair");
}

}  // namespace accmd
