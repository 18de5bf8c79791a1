#pragma once

// Conjugacies to the rotation and between two maps, invariant measures, and
// difference-quotient diagnostics for monotone circle maps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "breaklab/circle.hpp"
#include "breaklab/detail/csv.hpp"
#include "breaklab/error.hpp"
#include "breaklab/maps.hpp"
#include "breaklab/rotation.hpp"

namespace breaklab {

/// Monotone degree-one circle map given by samples. The table holds lifts
/// x̂₀ < x̂₁ < ... < x̂₀ + 1 from the anchor x̂₀ = x* and values ŷ₀ ≤ ŷ₁ ≤ ...
/// from ŷ₀ = y*; between samples (and across the seam, using (x̂₀+1, ŷ₀+1))
/// the map is linear.
class ConjugacyFunction {
 public:
  ConjugacyFunction() = default;

  /// Builds the table from unordered circle pairs; the anchor pair must be among them.
  static ConjugacyFunction from_pairs(const std::vector<std::pair<double, double>>& pairs, double anchor_x,
                                      double anchor_y, std::size_t orbit_length) {
    ConjugacyFunction c;
    c.anchor_x_ = frac(anchor_x);
    c.anchor_y_ = frac(anchor_y);
    c.orbit_length_ = orbit_length;
    std::vector<std::pair<double, double>> lifted;
    lifted.reserve(pairs.size());
    for (auto [x, y] : pairs) {
      double xl = lift_after(c.anchor_x_, x), yl = lift_after(c.anchor_y_, y);
      if (frac(x) == c.anchor_x_) yl = c.anchor_y_;
      lifted.emplace_back(xl, yl);
    }
    std::sort(lifted.begin(), lifted.end());
    lifted.erase(std::unique(lifted.begin(), lifted.end(),
                             [](const auto& u, const auto& v) { return u.first == v.first; }),
                 lifted.end());
    if (lifted.empty() || lifted.front().first != c.anchor_x_)
      throw Error(ErrorKind::InvalidArgument, "anchor missing from the conjugacy table");
    c.xs_.reserve(lifted.size());
    c.ys_.reserve(lifted.size());
    for (auto [x, y] : lifted) {
      c.xs_.push_back(x);
      c.ys_.push_back(y);
    }
    return c;
  }

  double anchor_x() const { return anchor_x_; }
  double anchor_y() const { return anchor_y_; }
  std::size_t size() const { return xs_.size(); }
  std::size_t orbit_length() const { return orbit_length_; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

  /// Number of adjacent samples whose values fail to increase strictly.
  std::size_t monotonicity_violations() const {
    std::size_t bad = 0;
    for (std::size_t i = 1; i < ys_.size(); ++i)
      if (!(ys_[i] > ys_[i - 1])) ++bad;
    if (!ys_.empty() && !(ys_.back() < ys_.front() + 1.0)) ++bad;
    return bad;
  }

  /// Largest gap between consecutive samples on the circle.
  double max_gap() const {
    double g = xs_.front() + 1.0 - xs_.back();
    for (std::size_t i = 1; i < xs_.size(); ++i) g = std::max(g, xs_[i] - xs_[i - 1]);
    return g;
  }

  /// Continuous lift: value(t + 1) = value(t) + 1 and value(x*) = y*.
  double lift(double t) const {
    double k = std::floor(t - anchor_x_);
    double u = t - k;  // in [x*, x*+1)
    if (u >= anchor_x_ + 1.0) {
      u -= 1.0;
      k += 1.0;
    }
    auto it = std::upper_bound(xs_.begin(), xs_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    double x0 = xs_[i], y0 = ys_[i];
    double x1, y1;
    if (i + 1 < xs_.size()) {
      x1 = xs_[i + 1];
      y1 = ys_[i + 1];
    } else {
      x1 = xs_.front() + 1.0;
      y1 = ys_.front() + 1.0;
    }
    double w = (u - x0) / (x1 - x0);
    return y0 + w * (y1 - y0) + k;
  }

  double eval(double x) const { return frac(lift(lift_after(anchor_x_, x))); }

  /// The inverse table (samples with equal values are merged).
  ConjugacyFunction inverse() const {
    std::vector<std::pair<double, double>> p;
    p.reserve(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) p.emplace_back(ys_[i], xs_[i]);
    return from_pairs(p, anchor_y_, anchor_x_, orbit_length_);
  }

  /// ψ̂⁻¹ for a monotone table, defined through the same interpolation.
  double inverse_lift(double y) const {
    double k = std::floor(y - anchor_y_);
    double v = y - k;
    if (v >= anchor_y_ + 1.0) {
      v -= 1.0;
      k += 1.0;
    }
    auto it = std::upper_bound(ys_.begin(), ys_.end(), v);
    std::size_t i = static_cast<std::size_t>(it - ys_.begin()) - 1;
    double y0 = ys_[i], x0 = xs_[i];
    double y1, x1;
    if (i + 1 < ys_.size()) {
      y1 = ys_[i + 1];
      x1 = xs_[i + 1];
    } else {
      y1 = ys_.front() + 1.0;
      x1 = xs_.front() + 1.0;
    }
    double w = y1 > y0 ? (v - y0) / (y1 - y0) : 0.0;
    return x0 + w * (x1 - x0) + k;
  }

 private:
  double anchor_x_ = 0.0;
  double anchor_y_ = 0.0;
  std::size_t orbit_length_ = 0;
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Orbit f^k(x), k ∈ [-N/2, N/2), iterated outwards from x.
template <LiftMap M>
std::vector<double> two_sided_orbit(const M& f, double x, std::int64_t N) {
  const std::int64_t back = N / 2, fwd = N - back;
  std::vector<double> out(static_cast<std::size_t>(N));
  double y = frac(x);
  for (std::int64_t k = 0; k < fwd; ++k) {
    out[static_cast<std::size_t>(back + k)] = y;
    y = frac(f.lift(y));
  }
  y = frac(x);
  for (std::int64_t k = 1; k <= back; ++k) {
    y = frac(f.inverse_lift(y));
    out[static_cast<std::size_t>(back - k)] = y;
  }
  return out;
}

/// frac(y + kρ) with the product formed in extended precision.
inline double rotate_by(double y, std::int64_t k, double rho) {
  long double t = static_cast<long double>(y) + static_cast<long double>(k) * static_cast<long double>(rho);
  t -= std::floor(t);
  double d = static_cast<double>(t);
  return d >= 1.0 ? 0.0 : d;
}

/// φ with φ∘f = R_ρ∘φ on the orbit of x*, normalized by φ(x*) = y*.
template <LiftMap M>
ConjugacyFunction conjugacy_to_rotation(const M& f, double rho, std::int64_t N, double anchor_x = 0.0,
                                        double anchor_y = 0.0) {
  if (N < 1000) throw Error(ErrorKind::InvalidArgument, "conjugacy tables need N >= 1000");
  auto orbit = two_sided_orbit(f, anchor_x, N);
  const std::int64_t back = N / 2;
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(orbit.size());
  for (std::int64_t i = 0; i < N; ++i)
    pairs.emplace_back(orbit[static_cast<std::size_t>(i)], rotate_by(anchor_y, i - back, rho));
  return ConjugacyFunction::from_pairs(pairs, anchor_x, anchor_y, static_cast<std::size_t>(N));
}

/// Fraction of the orbit {f^k(x₀)}, 0 ≤ k < N, lying in [a,b).
template <LiftMap M>
double birkhoff_frequency(const M& f, double a, double b, std::int64_t N, double x0 = 0.0) {
  double len = arc_length(a, b);
  std::int64_t hits = 0;
  double x = frac(x0);
  for (std::int64_t k = 0; k < N; ++k) {
    if (arc_length(a, x) < len) ++hits;
    x = frac(f.lift(x));
  }
  return static_cast<double>(hits) / static_cast<double>(N);
}

struct MeasureEstimate {
  double value = 0.0;      ///< φ-length of the arc
  double birkhoff = 0.0;   ///< visit frequency of the arc
  double error = 0.0;      ///< 3/√N
};

/// μ_f([a,b]) as the length of φ([a,b]), cross-checked by visit frequency.
template <LiftMap M>
MeasureEstimate invariant_measure_of_arc(const M& f, double rho, double a, double b, std::int64_t N) {
  if (N < 10000) throw Error(ErrorKind::InvalidArgument, "measure estimates need N >= 10^4");
  MeasureEstimate m;
  m.error = 3.0 / std::sqrt(static_cast<double>(N));
  if (frac(a) == frac(b)) {
    m.value = m.birkhoff = 0.0;
    return m;
  }
  auto phi = conjugacy_to_rotation(f, rho, N, a, 0.0);
  double bl = lift_after(frac(a), b);
  m.value = phi.lift(bl) - phi.lift(frac(a));
  m.birkhoff = birkhoff_frequency(f, a, b, N, a);
  return m;
}

/// Whole-circle measure.
template <LiftMap M>
MeasureEstimate invariant_measure_of_circle(const M&, std::int64_t N) {
  return {1.0, 1.0, 3.0 / std::sqrt(static_cast<double>(N))};
}

// ---------------------------------------------------------------------------
// ψ = φ₂⁻¹ ∘ φ₁

struct PsiResult {
  ConjugacyFunction psi;
  double residual = 0.0;  ///< sup over a grid of |ψ(f₁(x)) - f₂(ψ(x))|
};

/// Composition of two sample tables: samples at the x's of `inner`.
inline ConjugacyFunction compose_tables(const ConjugacyFunction& outer, const ConjugacyFunction& inner) {
  std::vector<std::pair<double, double>> p;
  p.reserve(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) p.emplace_back(inner.xs()[i], frac(outer.lift(inner.ys()[i])));
  double ay = frac(outer.lift(inner.ys().front()));
  return ConjugacyFunction::from_pairs(p, inner.anchor_x(), ay, inner.orbit_length());
}

template <LiftMap M1, LiftMap M2>
double conjugacy_residual(const ConjugacyFunction& psi, const M1& f1, const M2& f2, int grid = 1000) {
  double worst = 0.0;
  for (int j = 0; j < grid; ++j) {
    double x = (j + 0.5) / grid;
    double lhs = psi.eval(frac(f1.lift(x)));
    double rhs = frac(f2.lift(psi.eval(x)));
    worst = std::max(worst, circle_distance(lhs, rhs));
  }
  return worst;
}

/// ψ with ψ∘f₁ = f₂∘ψ and ψ(a₁) = a₂, from φ₁(a₁) = a₁ and φ₂(a₂) = a₁.
template <LiftMap M1, LiftMap M2>
PsiResult build_conjugacy_psi(const M1& f1, double a1, const RotationNumber& rho1, const M2& f2, double a2,
                              const RotationNumber& rho2, std::int64_t N) {
  double gap = std::abs(rho1.value - rho2.value);
  gap = std::min(gap, 1.0 - gap);
  if (gap > rho1.error_bound + rho2.error_bound + 1e-15)
    throw Error(ErrorKind::RotationMismatch, "rotation numbers differ");
  const double rho = rho1.error_bound <= rho2.error_bound ? rho1.value : rho2.value;
  auto phi1 = conjugacy_to_rotation(f1, rho, N, a1, a1);
  auto phi2 = conjugacy_to_rotation(f2, rho, N, a2, a1);
  PsiResult r;
  r.psi = compose_tables(phi2.inverse(), phi1);
  r.residual = conjugacy_residual(r.psi, f1, f2);
  return r;
}

// ---------------------------------------------------------------------------
// Difference quotients

struct QuotientProfile {
  double h = 0.0;
  std::vector<double> quotients;   ///< (ψ(jh + h) - ψ(jh))/h
  std::vector<double> bin_edges;   ///< histogram edges, last is +inf
  std::vector<double> bin_mass;    ///< Lebesgue fraction of cells per bin

  double mean() const {
    long double s = 0;
    for (double q : quotients) s += q;
    return static_cast<double>(s / static_cast<long double>(quotients.size()));
  }

  /// Lebesgue fraction of grid cells with quotient below ε.
  double singularity_index(double eps) const {
    std::size_t c = 0;
    for (double q : quotients)
      if (q < eps) ++c;
    return static_cast<double>(c) / static_cast<double>(quotients.size());
  }
};

/// Edges 0, 10^{-3}, 10^{-2.75}, ..., 10^{3}, +inf.
inline std::vector<double> profile_bin_edges() {
  std::vector<double> e{0.0};
  for (int k = -12; k <= 12; ++k) e.push_back(std::pow(10.0, k / 4.0));
  e.push_back(std::numeric_limits<double>::infinity());
  return e;
}

inline QuotientProfile quotient_profile(const ConjugacyFunction& psi, double h) {
  if (!(h > 0.0) || h > 0.5) throw Error(ErrorKind::InvalidArgument, "scale must lie in (0, 1/2]");
  if (h < 4.0 / static_cast<double>(psi.orbit_length()))
    throw Error(ErrorKind::ScaleTooFine, "scale finer than the table resolution");
  const auto cells = static_cast<std::size_t>(std::llround(1.0 / h));
  QuotientProfile p;
  p.h = 1.0 / static_cast<double>(cells);
  p.quotients.resize(cells);
  std::vector<double> values(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j) values[j] = psi.lift(static_cast<double>(j) * p.h);
  for (std::size_t j = 0; j < cells; ++j) p.quotients[j] = (values[j + 1] - values[j]) / p.h;
  p.bin_edges = profile_bin_edges();
  p.bin_mass.assign(p.bin_edges.size() - 1, 0.0);
  for (double q : p.quotients) {
    auto it = std::upper_bound(p.bin_edges.begin(), p.bin_edges.end(), q);
    std::size_t b = static_cast<std::size_t>(it - p.bin_edges.begin());
    b = std::min(std::max<std::size_t>(b, 1), p.bin_mass.size()) - 1;
    p.bin_mass[b] += 1.0 / static_cast<double>(cells);
  }
  return p;
}

inline void write_profile_csv_header(std::ostream& os) { os << "h,bin_left,bin_right,mass\n"; }

inline void write_profile_csv_rows(std::ostream& os, const QuotientProfile& p) {
  for (std::size_t b = 0; b < p.bin_mass.size(); ++b)
    os << csv_num(p.h) << ',' << csv_num(p.bin_edges[b]) << ',' << csv_num(p.bin_edges[b + 1]) << ','
       << csv_num(p.bin_mass[b]) << '\n';
}

inline void write_psi_csv(std::ostream& os, const ConjugacyFunction& psi, int grid) {
  os << "x,psi(x)\n";
  for (int j = 0; j < grid; ++j) {
    double x = static_cast<double>(j) / grid;
    os << csv_num(x) << ',' << csv_num(psi.eval(x)) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Matching the measure condition

template <class M>
struct MeasureMatch {
  M map;
  double b2 = 0.0;
  double offset = 0.0;
  double measure = 0.0;  ///< μ₂([a₂, b₂]) after tuning
  double target = 0.0;   ///< μ₁([a₁, b₁])
  RotationNumber rho;
};

/// Bisects the second break b₂ ∈ (a₂, a₂+1) of `make(b₂)` (a descriptor whose
/// jump ratios are re-imposed for each b₂) until μ₂([a₂,b₂]) matches `target`
/// within `tol`; each candidate is re-tuned to ρ*. μ₂ is read off the φ-table.
inline MeasureMatch<PHomeomorphism> match_measure_condition(
    const std::function<FamilyDescriptor(double)>& make, double a2, double target, const TargetRho& rho,
    double rho_tol, std::int64_t N, double tol) {
  if (!(target > 0.0) || !(target < 1.0))
    throw Error(ErrorKind::InvalidArgument, "target measure must lie strictly between 0 and 1");
  auto measure_at = [&](double b2, MeasureMatch<PHomeomorphism>& out) {
    auto tuned = tune_family(make(b2), rho, rho_tol);
    auto m = invariant_measure_of_arc(tuned.map, rho.value, a2, b2, N);
    out = {tuned.map, frac(b2), tuned.offset, m.value, target, tuned.rho};
    return m.value;
  };
  double lo = a2 + 1e-3, hi = a2 + 1.0 - 1e-3;
  MeasureMatch<PHomeomorphism> cur;
  double mlo = measure_at(lo, cur);
  double mhi = measure_at(hi, cur);
  if (!(mlo < target && mhi > target)) throw Error(ErrorKind::BracketNotFound, "target measure not bracketed");
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    double m = measure_at(mid, cur);
    if (std::abs(m - target) <= tol) return cur;
    if (m < target)
      lo = mid;
    else
      hi = mid;
  }
  throw Error(ErrorKind::BracketNotFound, "measure bisection did not converge");
}

}  // namespace breaklab
