#pragma once

// Smooth circle maps without the closed-form piece structure: analytic
// perturbations of rotations, compositions and conjugates. They satisfy the
// LiftMap concept and are used for the smooth (non-Möbius) controls.

#include <cmath>
#include <numbers>

#include "breaklab/maps.hpp"

namespace breaklab {

/// h(t) = t + amp/(2π) sin(2π(t - phase)); a diffeomorphism for |amp| < 1.
struct SineDiffeo {
  double amp = 0.0;
  double phase = 0.0;

  double lift(double t) const {
    return t + amp / (2.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi * (t - phase));
  }
  double derivative(double t) const { return 1.0 + amp * std::cos(2.0 * std::numbers::pi * (t - phase)); }
  double second_derivative(double t) const {
    return -2.0 * std::numbers::pi * amp * std::sin(2.0 * std::numbers::pi * (t - phase));
  }

  /// Newton on the strictly increasing lift, safeguarded by the bracket [y-|amp|, y+|amp|].
  double inverse_lift(double y) const {
    double r = std::abs(amp) / (2.0 * std::numbers::pi);
    double lo = y - r, hi = y + r;
    double t = y;
    for (int it = 0; it < 100; ++it) {
      double g = lift(t) - y;
      if (g == 0.0) return t;
      if (g > 0) hi = t; else lo = t;
      double tn = t - g / derivative(t);
      if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
      if (std::abs(tn - t) <= 1e-17 * std::max(1.0, std::abs(t))) return tn;
      t = tn;
    }
    return t;
  }
};

/// Arnold family t ↦ h(t) + offset with h a SineDiffeo.
struct ArnoldMap {
  SineDiffeo h;
  double offset = 0.0;

  double lift(double t) const { return h.lift(t) + offset; }
  double inverse_lift(double y) const { return h.inverse_lift(y - offset); }
  double derivative(double t) const { return h.derivative(t); }
  ArnoldMap with_offset(double t) const { return {h, t}; }
};

/// outer ∘ inner; the offset is applied after the outer map.
template <LiftMap Outer, LiftMap Inner>
struct Composed {
  Outer outer;
  Inner inner;
  double offset = 0.0;

  double lift(double t) const { return outer.lift(inner.lift(t)) + offset; }
  double inverse_lift(double y) const { return inner.inverse_lift(outer.inverse_lift(y - offset)); }
  Composed with_offset(double t) const { return {outer, inner, t}; }
};

/// h ∘ f ∘ h⁻¹: conjugate of f by the diffeomorphism h.
template <LiftMap F, LiftMap H>
struct Conjugated {
  F f;
  H h;

  double lift(double t) const { return h.lift(f.lift(h.inverse_lift(t))); }
  double inverse_lift(double y) const { return h.lift(f.inverse_lift(h.inverse_lift(y))); }
};

}  // namespace breaklab
