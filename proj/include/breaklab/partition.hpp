#pragma once

// Dynamical partitions ξ_n(x₀), q_n-smallness, break preimages and the middle point t₀.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "breaklab/circle.hpp"
#include "breaklab/detail/csv.hpp"
#include "breaklab/error.hpp"
#include "breaklab/maps.hpp"
#include "breaklab/rotation.hpp"

namespace breaklab {

enum class IntervalKind { Long, Short };

inline const char* to_string(IntervalKind k) { return k == IntervalKind::Long ? "long" : "short"; }

/// Counterclockwise arc [left, right] of ξ_n together with its index.
struct PartitionInterval {
  IntervalKind kind = IntervalKind::Long;
  std::int64_t index = 0;
  double left = 0.0;
  double right = 0.0;
  double length() const { return arc_length(left, right); }
};

/// ξ_n(x₀): long intervals Δ_i^{(n-1)}, 0 ≤ i < q_n, and short intervals
/// Δ_j^{(n)}, 0 ≤ j < q_{n-1}. For n odd x_{q_n} lies to the left of x₀ and
/// x_{q_{n-1}} to its right; for n even both sides are swapped.
struct DynamicalPartition {
  int n = 1;
  double x0 = 0.0;
  std::int64_t qn = 1;
  std::int64_t qn_prev = 1;
  std::int64_t pn = 0;
  std::int64_t pn_prev = 0;
  bool odd = true;
  std::vector<double> orbit;  ///< x_k = f^k(x₀), 0 ≤ k ≤ q_n + q_{n-1}
  std::vector<PartitionInterval> long_intervals;
  std::vector<PartitionInterval> short_intervals;

  std::size_t size() const { return long_intervals.size() + short_intervals.size(); }
  const PartitionInterval& long_generator() const { return long_intervals.front(); }
  const PartitionInterval& short_generator() const { return short_intervals.front(); }

  double total_length() const {
    double s = 0.0;
    for (const auto& I : long_intervals) s += I.length();
    for (const auto& I : short_intervals) s += I.length();
    return s;
  }
  double max_length() const {
    double m = 0.0;
    for (const auto& I : long_intervals) m = std::max(m, I.length());
    for (const auto& I : short_intervals) m = std::max(m, I.length());
    return m;
  }
};

namespace detail {

template <class M>
std::vector<double> break_locations(const M& f) {
  std::vector<double> out;
  if constexpr (requires { f.breaks(); })
    for (const auto& b : f.breaks()) out.push_back(b.location);
  return out;
}

inline bool orbit_hits(const std::vector<double>& orbit, const std::vector<double>& breaks, double tol) {
  for (double b : breaks)
    for (double x : orbit)
      if (circle_distance(x, b) <= tol) return true;
  return false;
}

}  // namespace detail

inline constexpr double kDefaultSeed = 0.107;

/// The level-n gate on the accuracy of ρ.
inline void require_rho_precision(const RotationNumber& rho, const ContinuedFraction& cf, int n) {
  if (n < 1 || n + 1 > cf.depth())
    throw Error(ErrorKind::InvalidArgument, "partition level outside the known expansion");
  double q = static_cast<double>(cf.qn(n + 1));
  if (!(rho.error_bound < 1.0 / (4.0 * q * q)))
    throw Error(ErrorKind::InsufficientRhoPrecision, "rotation number too coarse for level " + std::to_string(n));
}

/// Builds ξ_n(x₀) from one forward orbit of x₀. If that orbit passes within
/// 1e-12 of a break, x₀ is moved by 1e-3 and the construction repeated.
template <LiftMap M>
DynamicalPartition build_dynamical_partition(const M& f, const RotationNumber& rho, const ContinuedFraction& cf,
                                             int n, double x0 = kDefaultSeed) {
  require_rho_precision(rho, cf, n);
  DynamicalPartition P;
  P.n = n;
  P.qn = cf.qn(n);
  P.qn_prev = cf.qn(n - 1);
  P.pn = cf.pn(n);
  P.pn_prev = cf.pn(n - 1);
  P.odd = (n % 2 == 1);
  const std::int64_t total = P.qn + P.qn_prev;
  const auto breaks = detail::break_locations(f);

  double seed = frac(x0);
  for (int attempt = 0;; ++attempt) {
    P.orbit.assign(static_cast<std::size_t>(total + 1), 0.0);
    double x = seed;
    for (std::int64_t k = 0; k <= total; ++k) {
      P.orbit[static_cast<std::size_t>(k)] = x;
      x = frac(f.lift(x));
    }
    if (!detail::orbit_hits(P.orbit, breaks, 1e-12)) break;
    if (attempt >= 50) throw Error(ErrorKind::BreakOnBoundary, "could not find a seed avoiding the breaks");
    seed = frac(seed + 1e-3);
  }
  P.x0 = seed;

  const auto& x = P.orbit;
  auto at = [&](std::int64_t k) { return x[static_cast<std::size_t>(k)]; };
  P.long_intervals.reserve(static_cast<std::size_t>(P.qn));
  for (std::int64_t i = 0; i < P.qn; ++i) {
    PartitionInterval I{IntervalKind::Long, i, 0, 0};
    if (P.odd) {
      I.left = at(i);
      I.right = at(i + P.qn_prev);
    } else {
      I.left = at(i + P.qn_prev);
      I.right = at(i);
    }
    P.long_intervals.push_back(I);
  }
  P.short_intervals.reserve(static_cast<std::size_t>(P.qn_prev));
  for (std::int64_t j = 0; j < P.qn_prev; ++j) {
    PartitionInterval I{IntervalKind::Short, j, 0, 0};
    if (P.odd) {
      I.left = at(j + P.qn);
      I.right = at(j);
    } else {
      I.left = at(j);
      I.right = at(j + P.qn);
    }
    P.short_intervals.push_back(I);
  }
  if (P.long_generator().length() < 1e-14 || P.short_generator().length() < 1e-14)
    throw Error(ErrorKind::DegenerateGenerator, "generator shorter than 1e-14");
  return P;
}

/// Worst endpoint or length mismatch in the split of every Δ_i^{(n-1)} into
/// Δ_i^{(n+1)} followed by k_{n+1} intervals Δ^{(n)}_{i+q_{n-1}+s q_n}.
inline double refinement_mismatch(const DynamicalPartition& coarse, const DynamicalPartition& fine,
                                  std::int64_t k_next) {
  if (fine.n != coarse.n + 1 || fine.x0 != coarse.x0)
    throw Error(ErrorKind::InvalidArgument, "refinement needs consecutive levels with the same seed");
  double worst = 0.0;
  const auto& orbit = coarse.orbit;
  auto point = [&](std::int64_t k) {
    if (k < static_cast<std::int64_t>(orbit.size())) return orbit[static_cast<std::size_t>(k)];
    return fine.orbit.at(static_cast<std::size_t>(k));
  };
  for (std::int64_t i = 0; i < coarse.qn; ++i) {
    const auto& parent = coarse.long_intervals[static_cast<std::size_t>(i)];
    const auto& head = fine.short_intervals[static_cast<std::size_t>(i)];  // Δ_i^{(n+1)}
    double sum = head.length();
    // fine.short_intervals[i] starts at x_i; the chain of level-n pieces continues from x_{i+q_{n+1}}
    std::int64_t start = i + coarse.qn_prev;
    for (std::int64_t s = 0; s < k_next; ++s) {
      std::int64_t j = start + s * coarse.qn;
      double a = point(j), b = point(j + coarse.qn);
      sum += arc_length(coarse.odd ? b : a, coarse.odd ? a : b);
      // zero when x_j lies inside the parent arc
      worst = std::max(worst, std::abs(arc_length(parent.left, parent.right) -
                                       (arc_length(parent.left, a) + arc_length(a, parent.right))));
    }
    worst = std::max(worst, std::abs(sum - parent.length()));
    // endpoints of the parent coincide with x_i and x_{i+q_{n-1}}
    double xi = point(i), xe = point(i + coarse.qn_prev);
    double e1 = coarse.odd ? circle_distance(parent.left, xi) : circle_distance(parent.right, xi);
    double e2 = coarse.odd ? circle_distance(parent.right, xe) : circle_distance(parent.left, xe);
    worst = std::max({worst, e1, e2});
    // Δ_i^{(n+1)} shares the endpoint x_i with its parent
    double e3 = circle_distance(fine.odd ? head.right : head.left, xi);
    worst = std::max(worst, e3);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// q_n-small arcs

/// Order criterion: [x,y] is q_n-small iff it holds no x_j, 0 < |j| < q_n. The
/// nearest such point counterclockwise from x is f^{q_{n-1}}(x) for n odd and
/// f^{-q_{n-1}}(x) for n even, so y must not pass it (up to `tol`).
template <LiftMap M>
bool is_qn_small(double x, double y, const M& f, const ContinuedFraction& cf, int n, double tol = 1e-12) {
  if (frac(x) == frac(y)) throw Error(ErrorKind::InvalidArgument, "is_qn_small needs a nondegenerate arc");
  std::int64_t q = cf.qn(n - 1);
  double bound = iterate(f, x, (n % 2 == 1) ? q : -q);
  return arc_length(x, y) <= arc_length(x, bound) + tol;
}

/// Brute-force oracle: the arcs f^i([x,y]), 0 ≤ i < q_n, have disjoint interiors
/// (touching within `tol` is allowed).
template <LiftMap M>
bool is_qn_small_bruteforce(double x, double y, const M& f, std::int64_t qn, double tol = 1e-12) {
  struct A {
    double a, len;
  };
  std::vector<A> arcs;
  arcs.reserve(static_cast<std::size_t>(qn));
  double a = frac(x), b = frac(y);
  double total = 0.0;
  for (std::int64_t i = 0; i < qn; ++i) {
    double len = arc_length(a, b);
    arcs.push_back({a, len});
    total += len;
    a = frac(f.lift(a));
    b = frac(f.lift(b));
  }
  if (total > 1.0 + tol) return false;
  std::sort(arcs.begin(), arcs.end(), [](const A& u, const A& v) { return u.a < v.a; });
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const A& cur = arcs[k];
    const A& nxt = arcs[(k + 1) % arcs.size()];
    double gap = arcs.size() == 1 ? 1.0 : arc_length(cur.a, nxt.a);
    if (cur.len > gap + tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Preimages of breaks and the middle point

struct PreimageRecord {
  double break_location = 0.0;
  double preimage = 0.0;       ///< ā with f^l(ā) = b
  std::int64_t index = 0;      ///< l
  IntervalKind generator = IntervalKind::Long;
};

/// Locates the unique interval of ξ_n covering b and pulls b back to the generator.
template <LiftMap M>
PreimageRecord qn_preimage_of_break(const M& f, const DynamicalPartition& P, double b, double tol = 1e-12) {
  b = frac(b);
  for (double x : P.orbit)
    if (circle_distance(x, b) <= tol)
      throw Error(ErrorKind::BreakOnBoundary, "break lies on an endpoint of the partition");
  auto scan = [&](const std::vector<PartitionInterval>& v) -> const PartitionInterval* {
    for (const auto& I : v)
      if (in_arc(b, I.left, I.right)) return &I;
    return nullptr;
  };
  const PartitionInterval* I = scan(P.long_intervals);
  if (!I) I = scan(P.short_intervals);
  if (!I) throw Error(ErrorKind::InvalidArgument, "break not covered by the partition");
  PreimageRecord r;
  r.break_location = b;
  r.index = I->index;
  r.generator = I->kind;
  r.preimage = iterate(f, b, -I->index, std::max<std::int64_t>(kDefaultIterationBudget, I->index));
  return r;
}

/// t₀ together with the lifted window [t̂₀, f̂^{q}(t̂₀) - P] whose midpoint is â.
struct MiddlePoint {
  double t0 = 0.0;
  double window_left = 0.0;   ///< lift of the left end of [t₀, f^q(t₀)] or its mirror
  double window_right = 0.0;  ///< lift of the right end
  double length = 0.0;        ///< l([t₀, f^{q}(t₀)])
};

/// Solves (t + f̂^q(t) - P)/2 = â by bisection, â taken as a lift in [0,1).
template <LiftMap M>
MiddlePoint middle_point_t0(const M& f, double a_bar, std::int64_t q) {
  const double a = frac(a_bar);
  SplitLift sa = iterate_lift_split(f, a, q);
  const std::int64_t P = sa.winding + static_cast<std::int64_t>(std::llround(sa.x - a));
  auto image = [&](double t) {
    SplitLift s = iterate_lift_split(f, t, q);
    return s.minus(P);
  };
  auto mid = [&](double t) { return 0.5 * (t + image(t)) - a; };
  double lo = a - 1.0, hi = a + 1.0;
  if (!(mid(lo) < 0.0 && mid(hi) > 0.0)) throw Error(ErrorKind::BisectionFailed, "middle-point bracket invalid");
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double m = 0.5 * (lo + hi);
    if (m <= lo || m >= hi) break;
    double v = mid(m);
    if (v == 0.0) {
      lo = hi = m;
      break;
    }
    if (v < 0.0)
      lo = m;
    else
      hi = m;
  }
  double t = 0.5 * (lo + hi);
  double img = image(t);
  if (std::abs(0.5 * (t + img) - a) > 1e-12) throw Error(ErrorKind::BisectionFailed, "middle point not resolved");
  MiddlePoint r;
  r.t0 = frac(t);
  r.window_left = std::min(t, img);
  r.window_right = std::max(t, img);
  r.length = r.window_right - r.window_left;
  return r;
}

// ---------------------------------------------------------------------------
// Decay of interval lengths

struct DecayReport {
  std::vector<int> levels;
  std::vector<double> max_lengths;
  double fitted_rate = 0.0;
  double lambda = 0.0;  ///< (1 + e^{-v})^{-1/2}
  bool within(double slack) const { return fitted_rate <= lambda + slack; }
};

inline double decay_lambda(double v) { return 1.0 / std::sqrt(1.0 + std::exp(-v)); }

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (den == 0.0) throw Error(ErrorKind::InvalidArgument, "regression needs two distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

template <LiftMap M>
DecayReport decay_report(const M& f, const RotationNumber& rho, const ContinuedFraction& cf, int n_max, double v,
                         double x0 = kDefaultSeed) {
  if (n_max < 2 || n_max + 1 > cf.depth()) throw Error(ErrorKind::InvalidArgument, "n_max outside the expansion");
  DecayReport r;
  r.lambda = decay_lambda(v);
  std::vector<double> xs, ys;
  for (int n = 1; n <= n_max; ++n) {
    auto P = build_dynamical_partition(f, rho, cf, n, x0);
    double m = P.max_length();
    r.levels.push_back(n);
    r.max_lengths.push_back(m);
    xs.push_back(n);
    ys.push_back(std::log(m));
  }
  r.fitted_rate = std::exp(fit_slope(xs, ys));
  return r;
}

inline DecayReport decay_report(const PHomeomorphism& f, const RotationNumber& rho, const ContinuedFraction& cf,
                                int n_max, double x0 = kDefaultSeed) {
  return decay_report(f, rho, cf, n_max, total_variation_log_df(f), x0);
}

// ---------------------------------------------------------------------------
// Invariant-measure mass on ξ_n

/// The μ-mass of each interval of ξ_n is exact: ‖q_{n-1}ρ‖ for long intervals
/// and ‖q_nρ‖ for short ones. Returns the smallest Lebesgue fraction of the
/// circle (a union of partition intervals taken in decreasing μ-density) that
/// carries `mass` of μ.
inline double mass_concentration(const DynamicalPartition& P, double rho, double mass = 0.9) {
  const long double r = rho;
  const long double mu_long = std::abs(static_cast<long double>(P.qn_prev) * r - P.pn_prev);
  const long double mu_short = std::abs(static_cast<long double>(P.qn) * r - P.pn);
  struct Cell {
    double density, len;
    long double mu;
  };
  std::vector<Cell> cells;
  cells.reserve(P.size());
  for (const auto& I : P.long_intervals)
    cells.push_back({static_cast<double>(mu_long / I.length()), I.length(), mu_long});
  for (const auto& I : P.short_intervals)
    cells.push_back({static_cast<double>(mu_short / I.length()), I.length(), mu_short});
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.density > b.density; });
  long double acc = 0, leb = 0;
  for (const auto& c : cells) {
    if (acc >= mass) break;
    long double need = mass - acc;
    if (c.mu <= need) {
      acc += c.mu;
      leb += c.len;
    } else {
      leb += c.len * (need / c.mu);
      acc = mass;
    }
  }
  return static_cast<double>(leb);
}

// ---------------------------------------------------------------------------
// CSV

inline void write_partition_csv_header(std::ostream& os) { os << "level,kind,i,left,right,length\n"; }

inline void write_partition_csv_rows(std::ostream& os, const DynamicalPartition& P) {
  auto row = [&](const PartitionInterval& I) {
    os << P.n << ',' << to_string(I.kind) << ',' << I.index << ',' << csv_num(I.left) << ',' << csv_num(I.right)
       << ',' << csv_num(I.length()) << '\n';
  };
  for (const auto& I : P.long_intervals) row(I);
  for (const auto& I : P.short_intervals) row(I);
}

}  // namespace breaklab
