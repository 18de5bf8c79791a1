#pragma once

// Cross-ratios, their distortion under circle maps, and the break-point predictions.

#include <array>
#include <cmath>
#include <cstdint>

#include "breaklab/circle.hpp"
#include "breaklab/error.hpp"
#include "breaklab/maps.hpp"

namespace breaklab {

/// Four points in strict circular order, held as lifts ẑ₁ < ẑ₂ < ẑ₃ < ẑ₄ < ẑ₁ + 1.
class Quadruple {
 public:
  static Quadruple from_lifts(double z1, double z2, double z3, double z4) {
    if (!(z1 < z2 && z2 < z3 && z3 < z4) || !(z4 - z1 < 1.0))
      throw Error(ErrorKind::DegenerateQuadruple, "quadruple lifts must increase strictly within one turn");
    return Quadruple({z1, z2, z3, z4});
  }

  /// Lifts the circle points starting from the lift of z₁ in [0,1).
  static Quadruple from_points(double z1, double z2, double z3, double z4) {
    std::array<double, 4> pts{z1, z2, z3, z4};
    LiftedVector v;
    try {
      v = lift_vector(pts, z1);
    } catch (const Error&) {
      throw Error(ErrorKind::DegenerateQuadruple, "points are not in strict circular order");
    }
    return from_lifts(v[0], v[1], v[2], v[3]);
  }

  double operator[](int i) const { return z_[static_cast<std::size_t>(i)]; }
  const std::array<double, 4>& lifts() const { return z_; }
  double span() const { return z_[3] - z_[0]; }
  double point(int i) const { return frac(z_[static_cast<std::size_t>(i)]); }

  /// Image under a lift, shifted by an integer so that ẑ₁ lies in [0,1).
  template <LiftMap M>
  Quadruple image(const M& f) const {
    std::array<double, 4> w{};
    for (std::size_t i = 0; i < 4; ++i) w[i] = f.lift(z_[i]);
    double k = std::floor(w[0]);
    for (auto& x : w) x -= k;
    return from_lifts(w[0], w[1], w[2], w[3]);
  }

 private:
  explicit Quadruple(std::array<double, 4> z) : z_(z) {}
  std::array<double, 4> z_;
};

/// Cr = (ẑ₂-ẑ₁)(ẑ₄-ẑ₃) / ((ẑ₃-ẑ₁)(ẑ₄-ẑ₂)).
inline double cross_ratio(const Quadruple& q) {
  return ((q[1] - q[0]) * (q[3] - q[2])) / ((q[2] - q[0]) * (q[3] - q[1]));
}

/// Dist = Cr(f(z))/Cr(z), written in gap ratios to keep cancellation low.
inline double distortion_between(const Quadruple& q, const Quadruple& fq) {
  double a = q[1] - q[0], b = q[2] - q[1], c = q[3] - q[2];
  double A = fq[1] - fq[0], B = fq[2] - fq[1], C = fq[3] - fq[2];
  return (A / a) * (C / c) * ((a + b) / (A + B)) * ((b + c) / (B + C));
}

template <LiftMap M>
double distortion(const Quadruple& q, const M& f) {
  return distortion_between(q, q.image(f));
}

/// Dist(z; f^n) from the initial and final quadruples, together with the
/// product of the per-step distortions along the orbit.
struct IteratedDistortion {
  double direct = 1.0;
  double product = 1.0;
  Quadruple final_image = Quadruple::from_lifts(0, 0.25, 0.5, 0.75);
};

template <LiftMap M>
IteratedDistortion iterated_distortion(const Quadruple& q, const M& f, std::int64_t n) {
  IteratedDistortion r;
  Quadruple cur = q;
  long double prod = 1.0L;
  for (std::int64_t i = 0; i < n; ++i) {
    Quadruple nxt = cur.image(f);
    prod *= distortion_between(cur, nxt);
    cur = nxt;
  }
  r.direct = distortion_between(q, cur);
  r.product = static_cast<double>(prod);
  r.final_image = cur;
  return r;
}

// ---------------------------------------------------------------------------
// Break geometry

inline double g_function(double x, double sigma) { return sigma * (1.0 + x) / (sigma + x); }

inline double f_function(double x, double t, double sigma) {
  double k = sigma + (1.0 - sigma) * t;
  return k * (1.0 + x) / (k + x);
}

enum class BreakSide { Left, Right };

inline const char* to_string(BreakSide s) { return s == BreakSide::Left ? "left" : "right"; }

struct BreakGeometry {
  double alpha = 0, beta = 0, gamma = 0, tau = 0;
  double xi = 0, zeta = 0, eta = 0, theta = 0;
};

/// α, β, γ, τ and the ratios ξ, ζ, η, ϑ for a break with lift b̂.
inline BreakGeometry break_geometry(const Quadruple& q, double b_lift) {
  BreakGeometry g;
  g.alpha = q[1] - q[0];
  g.beta = q[2] - q[1];
  g.gamma = q[3] - q[2];
  g.tau = q[1] - b_lift;
  g.xi = g.beta / g.alpha;
  g.zeta = g.tau / g.alpha;
  g.eta = g.beta / g.gamma;
  g.theta = (b_lift - q[2]) / g.gamma;
  return g;
}

struct BreakPrediction {
  double predicted = 1.0;
  BreakGeometry geometry;
  BreakSide side = BreakSide::Left;
};

/// Leading-order distortion of a quadruple containing one break b of f.
/// Left (b ∈ [z₁,z₂]): F(ξ, ζ, σ). Right (b ∈ [z₃,z₄]): F(η, ϑ, 1/σ); the
/// right-hand interval sees the slope ratio in the opposite order, which is
/// what makes the formula exact for piecewise-affine maps.
inline BreakPrediction break_distortion_prediction(const Quadruple& q, const PHomeomorphism& f,
                                                   const BreakPoint& b) {
  const double b_lift = lift_after(q[0], b.location);
  if (b_lift > q[3]) throw Error(ErrorKind::InvalidArgument, "break lies outside [z1, z4]");
  for (const auto& other : f.breaks()) {
    if (other.location == b.location) continue;
    if (lift_after(q[0], other.location) <= q[3])
      throw Error(ErrorKind::MultipleBreaks, "more than one break inside [z1, z4]");
  }
  BreakPrediction r;
  r.geometry = break_geometry(q, b_lift);
  const double sigma = b.jump_ratio();
  if (b_lift <= q[1]) {
    r.side = BreakSide::Left;
    r.predicted = f_function(r.geometry.xi, r.geometry.zeta, sigma);
  } else if (b_lift >= q[2]) {
    r.side = BreakSide::Right;
    r.predicted = f_function(r.geometry.eta, r.geometry.theta, 1.0 / sigma);
  } else {
    throw Error(ErrorKind::BreakInMiddleInterval, "break lies strictly between z2 and z3");
  }
  return r;
}

}  // namespace breaklab
