#pragma once

// Arithmetic on the circle S^1 = R/Z identified with [0,1).

#include <cmath>
#include <span>
#include <vector>

#include "breaklab/error.hpp"

namespace breaklab {

/// t - floor(t), with the rounding seam value 1.0 folded back to 0.0.
inline double frac(double t) {
  double r = t - std::floor(t);
  return r >= 1.0 ? 0.0 : r;
}

/// A point of S^1, always stored in [0,1).
class CirclePoint {
 public:
  constexpr CirclePoint() = default;
  explicit CirclePoint(double t) : x_(frac(t)) {}

  double value() const { return x_; }
  friend bool operator==(CirclePoint, CirclePoint) = default;

 private:
  double x_ = 0.0;
};

/// Counterclockwise arc from a to b.
struct Arc {
  CirclePoint a;
  CirclePoint b;
};

/// Length of the counterclockwise arc [a,b]; 0 for a degenerate arc.
inline double arc_length(double a, double b) {
  double fa = frac(a), fb = frac(b);
  if (fa < fb) return fb - fa;
  if (fb < fa) return 1.0 + fb - fa;
  return 0.0;
}

inline double arc_length(const Arc& arc) { return arc_length(arc.a.value(), arc.b.value()); }

/// Lift of b lying in [a, a+1) given a lift of a.
inline double lift_after(double a_lift, double b) {
  return a_lift + arc_length(a_lift, b);
}

/// Unsigned distance on the circle.
inline double circle_distance(double a, double b) {
  double d = arc_length(a, b);
  return std::min(d, 1.0 - d);
}

/// Signed shortest displacement from a to b, in [-1/2, 1/2).
inline double signed_displacement(double a, double b) {
  double d = arc_length(a, b);
  return d >= 0.5 ? d - 1.0 : d;
}

/// True if x lies in the closed counterclockwise arc [a,b].
inline bool in_arc(double x, double a, double b) {
  return arc_length(a, x) <= arc_length(a, b);
}

/// Strictly increasing lifts ẑ_1 < ... < ẑ_k inside [base, base+1].
class LiftedVector {
 public:
  LiftedVector() = default;
  explicit LiftedVector(std::vector<double> v) : values_(std::move(v)) {}

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double span_length() const { return values_.empty() ? 0.0 : values_.back() - values_.front(); }

 private:
  std::vector<double> values_;
};

/// Lifted vector of circularly ordered points. Every point is placed in
/// [base, base+1) and the sequence must come out strictly increasing.
inline LiftedVector lift_vector(std::span<const double> points, double base) {
  double b = frac(base);
  std::vector<double> out;
  out.reserve(points.size());
  for (double p : points) {
    double z = b + arc_length(b, p);
    if (!out.empty() && !(z > out.back()))
      throw Error(ErrorKind::NotCircularlyOrdered, "points are not strictly circularly ordered");
    out.push_back(z);
  }
  return LiftedVector(std::move(out));
}

/// True iff a counterclockwise sweep from z1 meets z2, z3, z4 in that order.
inline bool circular_order(double z1, double z2, double z3, double z4) {
  double p[4] = {frac(z1), frac(z2), frac(z3), frac(z4)};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] == p[j]) throw Error(ErrorKind::DuplicatePoint, "circular_order needs distinct points");
  double d2 = arc_length(p[0], p[1]);
  double d3 = arc_length(p[0], p[2]);
  double d4 = arc_length(p[0], p[3]);
  return d2 < d3 && d3 < d4;
}

}  // namespace breaklab
