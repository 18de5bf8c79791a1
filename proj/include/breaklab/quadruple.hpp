#pragma once

// Test quadruples built around the q_n-preimage of a break, and the
// comparability conditions (C_{R,ε}) they are required to meet.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "breaklab/circle.hpp"
#include "breaklab/crossratio.hpp"
#include "breaklab/error.hpp"
#include "breaklab/maps.hpp"
#include "breaklab/partition.hpp"
#include "breaklab/rotation.hpp"

namespace breaklab {

/// Where the preimage b̄ of the second break sits relative to U_n(ā) and ā.
enum class QuadrupleCase { InsideULeft, InsideURight, OutsideULeft, OutsideURight };

inline const char* to_string(QuadrupleCase c) {
  switch (c) {
    case QuadrupleCase::InsideULeft: return "inU-left";
    case QuadrupleCase::InsideURight: return "inU-right";
    case QuadrupleCase::OutsideULeft: return "outU-left";
    case QuadrupleCase::OutsideURight: return "outU-right";
  }
  return "?";
}

/// Right-hand cases put ā at z₃ and are the mirror images of the left ones.
inline bool is_mirrored(QuadrupleCase c) {
  return c == QuadrupleCase::InsideURight || c == QuadrupleCase::OutsideURight;
}

struct QuadrupleScenario {
  int n = 0;
  double x0 = 0.0;            ///< seed of ξ_n(x₀)
  double t0 = 0.0;
  double window_length = 0.0; ///< L = l([t₀, f^{q_{n-1}}(t₀)])
  double a_bar = 0.0;
  std::int64_t l = 0;         ///< f^l(ā) = a
  std::optional<double> b_bar;
  std::int64_t p = 0;         ///< f^p(b̄) = b
  double delta = 0.0;         ///< δ_n = L√ε/4
  double gamma = 0.0;         ///< γ_n = L ε^{1/4}/2
  double a_lift = 0.0;        ///< lift of ā, in [0,1)
  double window_left = 0.0;   ///< lift of t₀
  double window_right = 0.0;  ///< lift of f^{q_{n-1}}(t₀)
  QuadrupleCase which = QuadrupleCase::OutsideULeft;
  Quadruple z = Quadruple::from_lifts(0, 0.25, 0.5, 0.75);

  bool mirrored() const { return is_mirrored(which); }
  double u_left() const { return a_lift - delta; }
  double u_right() const { return a_lift + delta; }
  double v_left() const { return a_lift - gamma; }
  double v_right() const { return a_lift + gamma; }
};

/// The limit of Dist(z; f^{q_n}) for the active case: each break crossed on
/// the left contributes σ, each crossed on the right 1/σ.
inline double distortion_target(QuadrupleCase c, double sigma_a, double sigma_b) {
  switch (c) {
    case QuadrupleCase::InsideULeft: return sigma_a * sigma_b;
    case QuadrupleCase::InsideURight: return 1.0 / (sigma_a * sigma_b);
    case QuadrupleCase::OutsideULeft: return sigma_a;
    case QuadrupleCase::OutsideURight: return 1.0 / sigma_a;
  }
  return 1.0;
}

/// Builds z₁..z₄ at level n (odd) for a map with first break a and optional
/// second break b. U_n and V_n are the δ_n- and γ_n-neighbourhoods of ā.
template <LiftMap M>
QuadrupleScenario construct_test_quadruple(const M& f, double a, std::optional<double> b, const RotationNumber& rho,
                                           const ContinuedFraction& cf, int n, double eps,
                                           double x0 = kDefaultSeed) {
  if (n % 2 == 0) throw Error(ErrorKind::InvalidArgument, "quadruples are built at odd levels");
  if (!(eps > 0.0 && eps <= 0.1)) throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, 0.1]");
  QuadrupleScenario s;
  s.n = n;
  auto P = build_dynamical_partition(f, rho, cf, n, x0);
  s.x0 = P.x0;
  auto pa = qn_preimage_of_break(f, P, a);
  s.a_bar = pa.preimage;
  s.l = pa.index;

  auto mp = middle_point_t0(f, s.a_bar, P.qn_prev);
  s.t0 = mp.t0;
  s.window_length = mp.length;
  s.a_lift = frac(s.a_bar);
  s.window_left = s.a_lift - 0.5 * mp.length;
  s.window_right = s.a_lift + 0.5 * mp.length;
  const double L = mp.length;
  s.delta = 0.25 * L * std::sqrt(eps);
  s.gamma = 0.5 * L * std::sqrt(std::sqrt(eps));

  double b_lift = 0.0;
  bool in_u = false, left = true;
  if (b) {
    auto Pt = build_dynamical_partition(f, rho, cf, n, s.t0);
    if (Pt.x0 != s.t0) throw Error(ErrorKind::BreakOnBoundary, "orbit of t0 meets a break");
    auto pb = qn_preimage_of_break(f, Pt, *b);
    s.b_bar = pb.preimage;
    s.p = pb.index;
    b_lift = s.a_lift + signed_displacement(s.a_lift, pb.preimage);
    in_u = std::abs(b_lift - s.a_lift) < s.delta;
    left = b_lift < s.a_lift;
  }
  const double A = s.a_lift;
  double z1, z2, z3, z4;
  if (in_u && left) {
    s.which = QuadrupleCase::InsideULeft;
    z1 = A - s.gamma, z2 = A, z3 = A + 0.25 * L, z4 = A + 0.5 * L;
  } else if (in_u) {
    s.which = QuadrupleCase::InsideURight;
    z1 = A - 0.5 * L, z2 = A - 0.25 * L, z3 = A, z4 = A + s.gamma;
  } else if (left) {
    s.which = QuadrupleCase::OutsideULeft;
    z1 = A - s.delta, z2 = A, z3 = A + 0.25 * L, z4 = A + 0.5 * L;
  } else {
    s.which = QuadrupleCase::OutsideURight;
    z1 = A - 0.5 * L, z2 = A - 0.25 * L, z3 = A, z4 = A + s.delta;
  }
  const double slack = 1e-12;
  if (z1 < s.window_left - slack || z4 > s.window_right + slack)
    throw Error(ErrorKind::ConstructionOutOfWindow, "quadruple leaves [t0, f^{q_{n-1}}(t0)]");
  s.z = Quadruple::from_lifts(z1, z2, z3, z4);
  return s;
}

// ---------------------------------------------------------------------------
// Conditions (C_{R,ε})

/// Each margin is achieved/bound, so a condition holds iff its margin ≤ 1.
struct ConditionsReport {
  double margin_a = 0.0;
  double margin_b = 0.0;
  double margin_c = 0.0;
  bool a() const { return margin_a <= 1.0; }
  bool b() const { return margin_b <= 1.0; }
  bool c() const { return margin_c <= 1.0; }
  bool all() const { return a() && b() && c(); }
  double worst_margin() const { return std::max({margin_a, margin_b, margin_c}); }
};

/// (a) l₂₃√ε/R ≤ l₁₂ ≤ R l₂₃ ε^{1/4}, (b) l₂₃/R ≤ l₃₄ ≤ R l₂₃,
/// (c) max_i l(x₀, z_i) ≤ R l₂₃ with l the circle distance. `mirrored`
/// exchanges the roles of l₁₂ and l₃₄.
inline ConditionsReport check_conditions_C(const Quadruple& z, double x0, double R, double eps,
                                           bool mirrored = false) {
  double l12 = z[1] - z[0], l23 = z[2] - z[1], l34 = z[3] - z[2];
  if (mirrored) std::swap(l12, l34);
  const double re = std::sqrt(eps), qe = std::sqrt(re);
  ConditionsReport r;
  r.margin_a = std::max((l23 * re / R) / l12, l12 / (R * l23 * qe));
  r.margin_b = std::max((l23 / R) / l34, l34 / (R * l23));
  double far = 0.0;
  for (int i = 0; i < 4; ++i) far = std::max(far, circle_distance(x0, z.point(i)));
  r.margin_c = far / (R * l23);
  return r;
}

/// R₁ = 40 e^{5v}.
inline double default_r1(double v) { return 40.0 * std::exp(5.0 * v); }

}  // namespace breaklab
