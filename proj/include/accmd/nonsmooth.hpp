#pragma once

#include <cmath>
#include <limits>

#include "accmd/common.hpp"
#include "accmd/linalg.hpp"

namespace accmd {

// The nonsmooth part g of a composite objective f + g. Three kinds cover the
// supported problem families: a weighted l1 penalty, the indicator of the
// probability simplex, and the zero function for smooth problems.
struct NonsmoothTerm {
  enum class Kind { zero, l1, simplex_indicator };

  Kind kind = Kind::zero;
  double lambda = 0.0;  // l1 weight, > 0 when kind == l1

  static NonsmoothTerm zero() { return {}; }

  static NonsmoothTerm l1(double lambda) {
    if (!(lambda > 0.0)) throw config_error("l1 weight must be positive");
    return {Kind::l1, lambda};
  }

  static NonsmoothTerm simplex() { return {Kind::simplex_indicator, 0.0}; }

  // Feasibility slack for the simplex indicator; iterates produced by the
  // normalized exponential update satisfy it by construction.
  static constexpr double simplex_tol = 1e-9;

  double value(const Vector& x) const {
    switch (kind) {
      case Kind::zero:
        return 0.0;
      case Kind::l1:
        return lambda * norm_l1(x);
      case Kind::simplex_indicator: {
        double sum = 0.0;
        double min_entry = 0.0;
        for (double t : x) {
          sum += t;
          min_entry = std::min(min_entry, t);
        }
        const bool feasible =
            std::fabs(sum - 1.0) <= simplex_tol && min_entry >= -simplex_tol;
        return feasible ? 0.0 : std::numeric_limits<double>::infinity();
      }
    }
    return 0.0;
  }

  bool is_zero() const { return kind == Kind::zero; }
};

}  // namespace accmd
