#pragma once

// Rotation numbers, continued fractions and offset tuning.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "breaklab/error.hpp"
#include "breaklab/maps.hpp"

namespace breaklab {

enum class RhoMethod { ConvergentBracketing, PeriodicOrbit, OrbitAverage };

inline const char* to_string(RhoMethod m) {
  switch (m) {
    case RhoMethod::ConvergentBracketing: return "convergent-bracketing";
    case RhoMethod::PeriodicOrbit: return "periodic-orbit";
    case RhoMethod::OrbitAverage: return "orbit-average";
  }
  return "?";
}

struct Fraction {
  std::int64_t p = 0;
  std::int64_t q = 1;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

/// ρ in [0,1) with a rigorous-up-to-rounding error bound. The bracket holds the
/// two fractions (in lift coordinates) the rotation number was trapped between.
struct RotationNumber {
  double value = 0.0;
  double error_bound = 1.0;
  RhoMethod method = RhoMethod::ConvergentBracketing;
  Fraction lower{0, 1};
  Fraction upper{1, 1};
};

// ---------------------------------------------------------------------------
// Continued fractions

/// ρ = [k1, k2, ...] with convergents p_n/q_n; p[0]/q[0] = 0/1, q[1] = k1.
struct ContinuedFraction {
  std::vector<std::int64_t> k;  ///< k[n-1] is k_n
  std::vector<std::int64_t> p;  ///< p[n], n = 0..depth
  std::vector<std::int64_t> q;  ///< q[n], n = 0..depth
  bool terminated = false;      ///< the expansion of a rational ended

  int depth() const { return static_cast<int>(k.size()); }
  std::int64_t partial_quotient(int n) const { return k.at(static_cast<std::size_t>(n - 1)); }
  std::int64_t qn(int n) const { return q.at(static_cast<std::size_t>(n)); }
  std::int64_t pn(int n) const { return p.at(static_cast<std::size_t>(n)); }
};

inline ContinuedFraction from_partial_quotients(const std::vector<std::int64_t>& ks) {
  ContinuedFraction cf;
  cf.p = {0};
  cf.q = {1};
  std::int64_t p_prev = 1, q_prev = 0;  // p_{-1}, q_{-1}
  for (auto kn : ks) {
    if (kn <= 0) throw Error(ErrorKind::InvalidArgument, "partial quotients must be positive");
    std::int64_t pn = kn * cf.p.back() + p_prev;
    std::int64_t qn = kn * cf.q.back() + q_prev;
    p_prev = cf.p.back();
    q_prev = cf.q.back();
    cf.k.push_back(kn);
    cf.p.push_back(pn);
    cf.q.push_back(qn);
  }
  return cf;
}

inline constexpr int kMaxDepth = 40;

/// Euclid's algorithm run exactly on the binary value of ρ. The expansion is
/// reported as terminated once a convergent agrees with ρ to within two ulps,
/// which is where double precision stops distinguishing rationals.
inline ContinuedFraction continued_fraction(double rho, int depth) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidArgument, "continued_fraction needs 0 < rho < 1");
  if (depth < 1 || depth > kMaxDepth) throw Error(ErrorKind::InvalidArgument, "depth must be in [1, 40]");
  int e = 0;
  double m = std::frexp(rho, &e);  // rho = m 2^e, m in [1/2, 1)
  int shift = 53 - e;              // rho = M / 2^shift
  if (shift > 120) throw Error(ErrorKind::InvalidArgument, "rho too small for exact expansion");
  using u128 = unsigned __int128;
  u128 num = static_cast<u128>(std::ldexp(m, 53));
  u128 den = static_cast<u128>(1) << shift;
  const long double ulp = std::ldexp(1.0L, e - 53);

  std::vector<std::int64_t> ks;
  ContinuedFraction cf;
  std::int64_t p_prev = 1, q_prev = 0, p_cur = 0, q_cur = 1;
  while (static_cast<int>(ks.size()) < depth && num != 0) {
    u128 kq = den / num;
    u128 r = den % num;
    if (kq > static_cast<u128>(std::numeric_limits<std::int64_t>::max() / 4)) break;
    auto kn = static_cast<std::int64_t>(kq);
    std::int64_t pn = kn * p_cur + p_prev, qn = kn * q_cur + q_prev;
    if (qn > (std::int64_t{1} << 62)) break;
    ks.push_back(kn);
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = pn;
    q_cur = qn;
    den = num;
    num = r;
    long double diff = std::abs(static_cast<long double>(rho) - static_cast<long double>(pn) / qn);
    if (num == 0 || diff <= 2 * ulp) {
      // canonical finite form: a trailing quotient 1 merges into its predecessor
      if (ks.size() > 1 && ks.back() == 1) {
        ks.pop_back();
        ks.back() += 1;
      }
      cf = from_partial_quotients(ks);
      cf.terminated = true;
      return cf;
    }
  }
  cf = from_partial_quotients(ks);
  cf.terminated = (num == 0);
  return cf;
}

/// Named quadratic irrational whose expansion is known exactly.
struct TargetRho {
  std::string name;
  double value = 0.0;
  ContinuedFraction cf;
};

inline TargetRho named_target(const std::string& name) {
  if (name == "golden")
    return {name, (std::sqrt(5.0) - 1.0) / 2.0, from_partial_quotients(std::vector<std::int64_t>(kMaxDepth, 1))};
  if (name == "silver")
    return {name, std::sqrt(2.0) - 1.0, from_partial_quotients(std::vector<std::int64_t>(kMaxDepth, 2))};
  throw Error(ErrorKind::InvalidArgument, "unknown named rotation number '" + name + "'");
}

/// Accepts "golden", "silver" or a decimal value; rational values are rejected.
inline TargetRho parse_target(const std::string& s) {
  if (s == "golden" || s == "silver") return named_target(s);
  double v = std::stod(s);
  auto cf = continued_fraction(v, kMaxDepth);
  if (cf.terminated) throw Error(ErrorKind::InvalidArgument, "target rotation number " + s + " is rational");
  return {s, v, cf};
}

struct BoundedTypeReport {
  std::int64_t max_odd = 0;   ///< max k_{2n-1}
  std::int64_t max_even = 0;  ///< max k_{2n}
  bool in_Mo(std::int64_t bound) const { return max_odd <= bound; }
  bool in_Me(std::int64_t bound) const { return max_even <= bound; }
};

inline BoundedTypeReport bounded_type_report(const ContinuedFraction& cf) {
  BoundedTypeReport r;
  for (int n = 1; n <= cf.depth(); ++n) {
    auto kn = cf.partial_quotient(n);
    if (n % 2 == 1)
      r.max_odd = std::max(r.max_odd, kn);
    else
      r.max_even = std::max(r.max_even, kn);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Measuring ρ

inline constexpr double kPeriodicTol = 1e-13;

class BudgetExceededError : public Error {
 public:
  BudgetExceededError(RotationNumber best, double orbit_average)
      : Error(ErrorKind::BudgetExceeded, "rotation number bracket did not reach tolerance"),
        best_(best),
        orbit_average_(orbit_average) {}
  const RotationNumber& best_bracket() const { return best_; }
  double orbit_average() const { return orbit_average_; }

 private:
  RotationNumber best_;
  double orbit_average_;
};

/// f̂^q(0) - p.
template <LiftMap M>
double displacement(const M& f, const Fraction& pq) {
  return iterate_lift_split(f, 0.0, pq.q).minus(pq.p);
}

/// Whether f has a periodic orbit of type p/q, certified by a vanishing or
/// sign-changing displacement f̂^q(x) - p - x. The orbit of 0 under f̂^q - p is
/// followed first, then the break points and a uniform grid of `grid` points are scanned.
template <LiftMap M>
bool has_periodic_orbit(const M& f, const Fraction& pq, int max_steps, std::int64_t& cost, int grid = 1024) {
  auto disp = [&](double x) {
    cost += pq.q;
    return iterate_lift_split(f, x, pq.q).minus(pq.p) - x;
  };
  double x = 0.0;
  double d0 = 0.0;
  for (int i = 0; i < max_steps; ++i) {
    double d = disp(x);
    if (std::abs(d) < kPeriodicTol) return true;
    if (i == 0)
      d0 = d;
    else if ((d > 0) != (d0 > 0))
      return true;
    x = x + d;
  }
  // a semi-stable orbit through a break touches zero only at the break
  if constexpr (requires { f.breaks(); }) {
    for (const auto& b : f.breaks()) {
      double d = disp(b.location);
      if (std::abs(d) < kPeriodicTol || (d > 0) != (d0 > 0)) return true;
    }
  }
  for (int j = 1; j < grid; ++j) {
    double d = disp(static_cast<double>(j) / grid);
    if (std::abs(d) < kPeriodicTol || (d > 0) != (d0 > 0)) return true;
  }
  return false;
}

inline RotationNumber make_bracket(Fraction lo, Fraction hi) {
  RotationNumber r;
  double lv = lo.value(), hv = hi.value();
  double mid = 0.5 * (lv + hv);
  r.value = frac(mid);
  r.error_bound = 0.5 / (static_cast<double>(lo.q) * static_cast<double>(hi.q));
  r.method = RhoMethod::ConvergentBracketing;
  r.lower = lo;
  r.upper = hi;
  return r;
}

inline RotationNumber make_periodic(Fraction pq) {
  RotationNumber r;
  r.value = frac(pq.value());
  r.error_bound = kPeriodicTol;
  r.method = RhoMethod::PeriodicOrbit;
  r.lower = pq;
  r.upper = pq;
  return r;
}

/// ρ(f) by Farey descent: each mediant p/q is placed by the sign of f̂^q(0) - p.
template <LiftMap M>
RotationNumber rotation_number(const M& f, double tol = 1e-10, std::int64_t budget = 2'000'000'000) {
  if (!(tol >= 1e-12)) throw Error(ErrorKind::InvalidArgument, "rotation_number tolerance must be >= 1e-12");
  std::int64_t cost = 1;
  const double d = f.lift(0.0);
  const auto m = static_cast<std::int64_t>(std::floor(d));
  Fraction lo{m, 1}, hi{m + 1, 1};
  if (std::abs(d - static_cast<double>(m)) < kPeriodicTol) return make_periodic(lo);

  int streak = 0;
  bool last_up = false;
  while (0.5 / (static_cast<double>(lo.q) * static_cast<double>(hi.q)) > tol) {
    Fraction med{lo.p + hi.p, lo.q + hi.q};
    if (cost + med.q > budget) {
      double avg = iterate_lift_split(f, 0.0, std::min<std::int64_t>(budget / 4, 1'000'000)).minus(0) /
                   static_cast<double>(std::min<std::int64_t>(budget / 4, 1'000'000));
      throw BudgetExceededError(make_bracket(lo, hi), frac(avg));
    }
    double s = displacement(f, med);
    cost += med.q;
    if (std::abs(s) < kPeriodicTol) return make_periodic(med);
    bool up = s > 0;
    if (up)
      lo = med;
    else
      hi = med;
    streak = (streak > 0 && up == last_up) ? streak + 1 : 1;
    last_up = up;
    if (streak >= 32 && streak % 32 == 0) {
      // one endpoint has been stationary for a long time: test it for a periodic orbit
      Fraction still = up ? hi : lo;
      if (has_periodic_orbit(f, still, 256, cost)) return make_periodic(still);
    }
  }
  return make_bracket(lo, hi);
}

/// Plain orbit average f̂^N(0)/N mod 1; an independent estimate of ρ with error ≤ 1/N.
template <LiftMap M>
double orbit_average_rho(const M& f, std::int64_t n) {
  SplitLift s = iterate_lift_split(f, 0.0, n);
  double tau = (static_cast<double>(s.winding) + s.x) / static_cast<double>(n);
  return frac(tau);
}

// ---------------------------------------------------------------------------
// Tuning the offset of a monotone family to a target ρ

template <class M>
struct TunedMap {
  M map;
  double offset = 0.0;
  RotationNumber rho;
};

namespace detail {

/// Compares τ(f) with ρ* + m along the convergents of ρ*: +1 above, -1 below,
/// 0 when every convergent up to `levels` sits on the same side for both.
template <LiftMap M>
int side_of_target(const M& f, const TargetRho& target, std::int64_t m, int levels) {
  for (int n = 1; n <= levels; ++n) {
    Fraction c{target.cf.pn(n) + m * target.cf.qn(n), target.cf.qn(n)};
    double s = displacement(f, c);
    int target_side = (n % 2 == 0) ? 1 : -1;  // sign(ρ* - p_n/q_n)
    if (std::abs(s) < kPeriodicTol) return -target_side;
    int map_side = s > 0 ? 1 : -1;
    if (map_side != target_side) return map_side;
  }
  return 0;
}

}  // namespace detail

/// Bisection in the offset t of `family(t)` until the convergents of ρ*
/// certify |ρ(f_t) - ρ*| ≤ tol. The family must be nondecreasing in t with
/// family(t + 1) = family(t) + 1.
template <class Family>
auto tune_to_target_rho(Family&& family, const TargetRho& target, double tol, double t_lo = 0.0)
    -> TunedMap<std::decay_t<decltype(family(0.0))>> {
  using M = std::decay_t<decltype(family(0.0))>;
  if (target.cf.terminated || target.cf.depth() < 3)
    throw Error(ErrorKind::InvalidArgument, "target rotation number must be irrational");
  int levels = 2;
  while (levels < target.cf.depth() &&
         1.0 / (static_cast<double>(target.cf.qn(levels)) * static_cast<double>(target.cf.qn(levels - 1))) > tol)
    ++levels;
  double err = 1.0 / (static_cast<double>(target.cf.qn(levels)) * static_cast<double>(target.cf.qn(levels - 1)));
  if (err > tol) throw Error(ErrorKind::InvalidArgument, "tolerance finer than the known expansion supports");

  double lo = t_lo, hi = t_lo + 1.0;
  M f_lo = family(lo);
  auto m = static_cast<std::int64_t>(std::floor(f_lo.lift(0.0) - target.value)) - 1;
  int guard = 0;
  while (detail::side_of_target(f_lo, target, m, levels) >= 0) {
    if (++guard > 4) throw Error(ErrorKind::BracketNotFound, "could not place the target above the lower offset");
    ++m;
  }
  if (detail::side_of_target(family(hi), target, m, levels) <= 0)
    throw Error(ErrorKind::BracketNotFound, "family does not reach the target rotation number");

  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    M f = family(mid);
    int s = detail::side_of_target(f, target, m, levels);
    if (s == 0) {
      RotationNumber r;
      r.value = target.value;
      r.error_bound = err;
      r.method = RhoMethod::ConvergentBracketing;
      Fraction a{target.cf.pn(levels - 1), target.cf.qn(levels - 1)};
      Fraction b{target.cf.pn(levels), target.cf.qn(levels)};
      r.lower = (a.value() < b.value()) ? a : b;
      r.upper = (a.value() < b.value()) ? b : a;
      return {std::move(f), mid, r};
    }
    if (s > 0)
      hi = mid;
    else
      lo = mid;
  }
  throw Error(ErrorKind::BracketNotFound, "offset bisection exhausted double resolution");
}

/// Convenience overload for the library families.
inline TunedMap<PHomeomorphism> tune_family(const FamilyDescriptor& d, const TargetRho& target, double tol) {
  return tune_to_target_rho([&](double t) { return build_family(with_offset(d, t)); }, target, tol);
}

}  // namespace breaklab
