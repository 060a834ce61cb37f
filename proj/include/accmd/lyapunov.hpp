#pragma once

#include <cmath>
#include <utility>

#include "accmd/common.hpp"
#include "accmd/linalg.hpp"
#include "accmd/objective.hpp"

namespace accmd {

// Energy functions coupling a primal divergence of the objective with a
// mirror divergence anchored at a minimizer. Two bases are used: "shifted"
// measures the remainder f - w*phi (the strongly-convex regime with w = mu),
// "plain" measures f itself (the perturbed regime, where w plays the role of
// the perturbation weight).
//
//   energy:        E(x, y)  = D(x, x*) + w * D_phi(x*, y)
//   tilted_energy: E^b(x,y) = E(x, y) + b * <grad(x) - grad(x*), y - x*>
//   pair_energy:   B^b(x, xh, yh, y)
//                  = D(x, xh) + w * D_phi(yh, y) + b * <grad(x) - grad(xh), y - yh>
//
// so tilted_energy(b, x, y) == pair_energy(b, x, x*, x*, y). The tilt weight
// b is signed: the forward scheme contracts the +alpha tilt, the backward
// scheme the -alpha tilt.
class LyapunovSuite {
 public:
  enum class Base { shifted, plain };

  // mu_eff is the weight of the mirror term subtracted in the shifted base;
  // it normally equals f->mu() (that path uses the closed-form remainder).
  LyapunovSuite(ObjectivePtr f, Vector xstar, double mu_eff)
      : f_(std::move(f)), xstar_(std::move(xstar)), mu_(mu_eff) {
    if (!f_) throw usage_error("lyapunov suite requires an objective");
    if (xstar_.size() != f_->dim())
      throw usage_error("lyapunov suite: anchor dimension mismatch");
    native_ = mu_ == f_->mu();
    val_star_plain_ = f_->value(xstar_);
    grad_star_plain_ = f_->grad(xstar_);
    if (native_) {
      val_star_shifted_ = f_->value_shifted(xstar_);
      grad_star_shifted_ = f_->grad_shifted(xstar_);
    } else {
      // Only the overridden-weight path needs the mirror gradient at the
      // anchor, so anchors on the boundary stay usable with native weights.
      val_star_shifted_ = val_star_plain_ - mu_ * f_->mirror().value(xstar_);
      grad_star_shifted_ = grad_star_plain_;
      axpy(-mu_, f_->mirror().grad(xstar_), grad_star_shifted_);
    }
  }

  LyapunovSuite(ObjectivePtr f, Vector xstar)
      : LyapunovSuite(f, xstar, f->mu()) {}

  const Vector& anchor() const { return xstar_; }
  double mu_eff() const { return mu_; }

  double base_value(Base base, const Vector& x) const {
    if (base == Base::plain) return f_->value(x);
    return native_ ? f_->value_shifted(x)
                   : f_->value(x) - mu_ * f_->mirror().value(x);
  }

  Vector base_grad(Base base, const Vector& x) const {
    if (base == Base::plain) return f_->grad(x);
    if (native_) return f_->grad_shifted(x);
    Vector g = f_->grad(x);
    axpy(-mu_, f_->mirror().grad(x), g);
    return g;
  }

  // D(x, x*) in the chosen base, using the cached anchor gradient.
  double base_div(Base base, const Vector& x) const {
    const Vector& gs =
        base == Base::plain ? grad_star_plain_ : grad_star_shifted_;
    const double vs =
        base == Base::plain ? val_star_plain_ : val_star_shifted_;
    return base_value(base, x) - vs - dot(gs, sub(x, xstar_));
  }

  // D_phi(x*, y) evaluated at the anchor.
  double mirror_div_from(const Vector& y) const {
    return f_->mirror().bregman(xstar_, y);
  }

  double energy(Base base, double w, const Vector& x, const Vector& y) const {
    return base_div(base, x) + w * mirror_div_from(y);
  }

  double tilted_energy(Base base, double w, double beta, const Vector& x,
                       const Vector& y) const {
    const Vector& gs =
        base == Base::plain ? grad_star_plain_ : grad_star_shifted_;
    Vector gx = base_grad(base, x);
    const double cross = dot(sub(gx, gs), sub(y, xstar_));
    return energy(base, w, x, y) + beta * cross;
  }

  double pair_energy(Base base, double w, double beta, const Vector& x,
                     const Vector& xhat, const Vector& yhat,
                     const Vector& y) const {
    const auto& f = *f_;
    const Vector gxhat = base_grad(base, xhat);
    const double div =
        base_value(base, x) - base_value(base, xhat) - dot(gxhat, sub(x, xhat));
    const double dphi = f.mirror().bregman(yhat, y);
    const double cross = dot(sub(base_grad(base, x), gxhat), sub(y, yhat));
    return div + w * dphi + beta * cross;
  }

  const SmoothObjective& objective() const { return *f_; }

 private:
  ObjectivePtr f_;
  Vector xstar_;
  double mu_;
  bool native_ = true;
  double val_star_plain_ = 0.0;
  double val_star_shifted_ = 0.0;
  Vector grad_star_plain_;
  Vector grad_star_shifted_;
};

}  // namespace accmd
