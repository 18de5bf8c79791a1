#pragma once

// Circle homeomorphisms with break points (class P), built from affine and
// Möbius pieces so that values, derivatives and inverses are closed-form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "breaklab/circle.hpp"
#include "breaklab/error.hpp"

namespace breaklab {

enum class Side { Left, Right };
enum class PieceKind { Affine, Moebius };

/// Monotone piece on the lift: u in [start, end] maps onto [y_start, y_start + height]
/// through s ↦ s / (kappa + (1 - kappa) s) on the normalized coordinate s.
/// kappa = 1 is the affine piece. The derivative runs from (height/width)/kappa at
/// the left end to (height/width)*kappa at the right end.
struct MapPiece {
  double start = 0.0;
  double end = 1.0;
  double y_start = 0.0;
  double height = 1.0;
  double kappa = 1.0;
  PieceKind kind = PieceKind::Affine;

  double width() const { return end - start; }
  double slope() const { return height / width(); }

  double value(double u) const {
    double s = (u - start) / width();
    return y_start + height * (s / (kappa + (1.0 - kappa) * s));
  }
  double derivative(double u) const {
    double s = (u - start) / width();
    double d = kappa + (1.0 - kappa) * s;
    return slope() * kappa / (d * d);
  }
  double second_derivative(double u) const {
    double s = (u - start) / width();
    double d = kappa + (1.0 - kappa) * s;
    return -2.0 * slope() / width() * kappa * (1.0 - kappa) / (d * d * d);
  }
  double inverse(double y) const {
    double m = (y - y_start) / height;
    double s = kappa * m / (1.0 - (1.0 - kappa) * m);
    return start + width() * s;
  }
  double derivative_at_start() const { return slope() / kappa; }
  double derivative_at_end() const { return slope() * kappa; }
};

struct BreakPoint {
  double location = 0.0;
  double left_derivative = 1.0;
  double right_derivative = 1.0;

  double jump_ratio() const { return left_derivative / right_derivative; }
};

/// Orientation-preserving circle homeomorphism whose lift is given on a
/// fundamental window [w, w+1) by consecutive pieces, plus a constant offset:
/// f̂(t) = piece(t - m) + m + offset for the integer m placing t - m in the window.
class PHomeomorphism {
 public:
  PHomeomorphism() : PHomeomorphism(identity_pieces(), {}, 0.0) {}

  /// Assembles a map without validating it; call validate() for diagnostics.
  PHomeomorphism(std::vector<MapPiece> pieces, std::vector<double> declared_breaks, double offset,
                 double holder_alpha = 1.0)
      : pieces_(std::move(pieces)), offset_(offset), holder_alpha_(holder_alpha) {
    if (pieces_.empty()) throw Error(ErrorKind::InvalidArgument, "map needs at least one piece");
    for (double b : declared_breaks) breaks_.push_back(make_break(b));
  }

  const std::vector<MapPiece>& pieces() const { return pieces_; }
  const std::vector<BreakPoint>& breaks() const { return breaks_; }
  double offset() const { return offset_; }
  double holder_alpha() const { return holder_alpha_; }
  double window_start() const { return pieces_.front().start; }

  PHomeomorphism with_offset(double t) const {
    PHomeomorphism g = *this;
    g.offset_ = t;
    return g;
  }

  double lift(double t) const {
    auto [m, u] = reduce(t);
    return piece_for(u, Side::Right).value(u) + m + offset_;
  }

  double inverse_lift(double y) const {
    double yy = y - offset_;
    double y0 = pieces_.front().y_start;
    double m = std::floor(yy - y0);
    double v = yy - m;
    if (v >= y0 + 1.0) {
      v -= 1.0;
      m += 1.0;
    }
    const MapPiece* p = &pieces_.back();
    for (const auto& pc : pieces_)
      if (v < pc.y_start + pc.height) {
        p = &pc;
        break;
      }
    return p->inverse(v) + m;
  }

  double eval(double x) const { return frac(lift(x)); }
  double eval_inverse(double x) const { return frac(inverse_lift(x)); }

  /// One-sided derivative; away from piece joints both sides agree.
  double derivative(double t, Side side = Side::Right) const {
    auto [m, u] = reduce(t);
    const double w = window_start();
    if (side == Side::Left && u == w) return pieces_.back().derivative_at_end();
    return piece_for(u, side).derivative(u);
  }

  double second_derivative(double t) const {
    auto [m, u] = reduce(t);
    return piece_for(u, Side::Right).second_derivative(u);
  }

  /// Derivative bounds [c1, c2] from the piece parameters (each piece is monotone in log Df).
  std::pair<double, double> derivative_bounds() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& p : pieces_) {
      double d0 = p.derivative_at_start(), d1 = p.derivative_at_end();
      lo = std::min({lo, d0, d1});
      hi = std::max({hi, d0, d1});
    }
    return {lo, hi};
  }

  const BreakPoint* find_break(double location, double tol = 1e-12) const {
    for (const auto& b : breaks_)
      if (circle_distance(b.location, location) <= tol) return &b;
    return nullptr;
  }

 private:
  static std::vector<MapPiece> identity_pieces() { return {MapPiece{}}; }

  std::pair<double, double> reduce(double t) const {
    const double w = window_start();
    double m = std::floor(t - w);
    double u = t - m;
    if (u >= w + 1.0) {
      u -= 1.0;
      m += 1.0;
    }
    if (u < w) u = w;
    return {m, u};
  }

  const MapPiece& piece_for(double u, Side side) const {
    for (const auto& p : pieces_) {
      if (side == Side::Right ? (u < p.end) : (u <= p.end)) return p;
    }
    return pieces_.back();
  }

  BreakPoint make_break(double location) const {
    double b = frac(location);
    // lift b into the window
    double u = window_start() + arc_length(window_start(), b);
    BreakPoint bp;
    bp.location = b;
    bp.left_derivative = u == window_start() ? pieces_.back().derivative_at_end()
                                            : piece_for(u, Side::Left).derivative(u);
    bp.right_derivative = piece_for(u, Side::Right).derivative(u);
    return bp;
  }

  std::vector<MapPiece> pieces_;
  std::vector<BreakPoint> breaks_;
  double offset_ = 0.0;
  double holder_alpha_ = 1.0;
};

/// σ_f(b) = Df₋(b) / Df₊(b).
inline double jump_ratio(const PHomeomorphism& f, double b) {
  const BreakPoint* bp = f.find_break(b);
  if (!bp) throw Error(ErrorKind::NotABreakPoint, "no break of f at " + std::to_string(b));
  return bp->jump_ratio();
}

inline double one_sided_derivative(const PHomeomorphism& f, double x, Side side) {
  return f.derivative(frac(x), side);
}

/// Var log Df over the circle: piece variations plus the break jumps |log σ|.
inline double total_variation_log_df(const PHomeomorphism& f) {
  double v = 0.0;
  const auto& ps = f.pieces();
  for (const auto& p : ps) v += std::abs(std::log(p.derivative_at_end()) - std::log(p.derivative_at_start()));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& next = ps[(i + 1) % ps.size()];
    v += std::abs(std::log(ps[i].derivative_at_end()) - std::log(next.derivative_at_start()));
  }
  return v;
}

// ---------------------------------------------------------------------------
// Iteration

inline constexpr std::int64_t kDefaultIterationBudget = 10'000'000;

/// Circle map with lift and inverse lift: PHomeomorphism, or anything from generic_map.hpp.
template <class M>
concept LiftMap = requires(const M& f, double t) {
  { f.lift(t) } -> std::convertible_to<double>;
  { f.inverse_lift(t) } -> std::convertible_to<double>;
};

/// f^n(x) on the circle; negative n uses the inverse.
template <LiftMap M>
double iterate(const M& f, double x, std::int64_t n, std::int64_t budget = kDefaultIterationBudget) {
  if (std::abs(n) > budget)
    throw Error(ErrorKind::IterationBudgetExceeded, "requested " + std::to_string(n) + " iterates");
  double y = frac(x);
  if (n >= 0)
    for (std::int64_t i = 0; i < n; ++i) y = frac(f.lift(y));
  else
    for (std::int64_t i = 0; i < -n; ++i) y = frac(f.inverse_lift(y));
  return y;
}

/// Lift of f^n evaluated at the lift t, keeping the fractional part and the
/// winding count separate so that precision does not degrade with n.
struct SplitLift {
  std::int64_t winding = 0;
  double x = 0.0;  // in [0,1)

  /// winding + x - p, computed without forming the large sum first.
  double minus(std::int64_t p) const { return static_cast<double>(winding - p) + x; }
};

template <LiftMap M>
SplitLift iterate_lift_split(const M& f, double t, std::int64_t n) {
  SplitLift s;
  double fl = std::floor(t);
  s.winding = static_cast<std::int64_t>(fl);
  s.x = t - fl;
  for (std::int64_t i = 0; i < n; ++i) {
    double y = f.lift(s.x);
    double k = std::floor(y);
    s.winding += static_cast<std::int64_t>(k);
    s.x = y - k;
    if (s.x >= 1.0) {
      s.x -= 1.0;
      s.winding += 1;
    }
  }
  return s;
}

template <LiftMap M>
double iterate_lift(const M& f, double t, std::int64_t n) {
  if (n >= 0) {
    for (std::int64_t i = 0; i < n; ++i) t = f.lift(t);
  } else {
    for (std::int64_t i = 0; i < -n; ++i) t = f.inverse_lift(t);
  }
  return t;
}

/// Df̂ⁿ(t) = Π_{i<n} Df̂(f̂ⁱ(t)), right derivatives at breaks, summed in logs.
inline double derivative_of_iterate(const PHomeomorphism& f, double t, std::int64_t n) {
  double s = 0.0;
  double x = frac(t);
  for (std::int64_t i = 0; i < n; ++i) {
    s += std::log(f.derivative(x, Side::Right));
    x = frac(f.lift(x));
  }
  return std::exp(s);
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  bool valid = true;
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<std::string> violations;

  void fail(std::string msg) {
    valid = false;
    violations.push_back(std::move(msg));
  }
};

inline ValidationReport validate(const PHomeomorphism& f, int grid = 4096) {
  ValidationReport r;
  const auto& ps = f.pieces();
  const double w = f.window_start();

  if (std::abs(ps.back().end - (w + 1.0)) > 1e-12) r.fail("pieces do not cover one fundamental window");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& p = ps[i];
    if (!(p.width() > 0)) r.fail("piece " + std::to_string(i) + " has empty domain");
    if (!(p.height > 0) || !(p.kappa > 0)) r.fail("piece " + std::to_string(i) + " is not increasing");
    if (i + 1 < ps.size()) {
      const auto& q = ps[i + 1];
      if (std::abs(p.end - q.start) > 1e-12) r.fail("piece domains do not abut at joint " + std::to_string(i));
      if (std::abs(p.y_start + p.height - q.y_start) > 1e-12)
        r.fail("continuity violation at joint " + std::to_string(i));
    }
  }
  const auto& last = ps.back();
  if (std::abs(last.y_start + last.height - (ps.front().y_start + 1.0)) > 1e-12)
    r.fail("lift is not degree one");

  // monotonicity on a dense grid
  double prev = f.lift(w);
  for (int k = 1; k <= grid; ++k) {
    double t = w + static_cast<double>(k) / grid;
    double y = f.lift(t);
    if (!(y > prev)) {
      r.fail("monotonicity violation near t=" + std::to_string(t));
      break;
    }
    prev = y;
  }

  auto [c1, c2] = f.derivative_bounds();
  r.c1 = c1;
  r.c2 = c2;
  if (!(c1 > 0) || !std::isfinite(c2)) r.fail("derivative bounds are not in (0, inf)");

  // declared breaks must be exactly the joints with a derivative mismatch
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& next = ps[(i + 1) % ps.size()];
    double dl = ps[i].derivative_at_end(), dr = next.derivative_at_start();
    bool is_break = std::abs(std::log(dl / dr)) > 1e-12;
    bool declared = f.find_break(ps[i].end) != nullptr;
    if (is_break && !declared) r.fail("undeclared break at " + std::to_string(frac(ps[i].end)));
    if (!is_break && declared) r.fail("declared break at " + std::to_string(frac(ps[i].end)) + " is smooth");
  }
  for (const auto& b : f.breaks()) {
    bool at_joint = false;
    for (const auto& p : ps) at_joint |= circle_distance(p.end, b.location) <= 1e-12;
    if (!at_joint) r.fail("declared break at " + std::to_string(b.location) + " is interior to a piece");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Families

struct RigidRotation {
  double rho = 0.0;
};

/// Two affine pieces on [a,b] and [b,a+1]; the jump product is forced to 1.
struct TwoBreakPL {
  double a = 0.25;
  double b = 0.75;
  double interior_slope = 0.5;  ///< slope on [a,b]
  double offset = 0.0;          ///< f̂(a) - a
};

/// TwoBreakPL on [a,b] whose jump ratio at a is σ_a (and 1/σ_a at b).
inline TwoBreakPL two_break_pl_with_jump(double a, double b, double sigma_a, double offset = 0.0) {
  double w1 = arc_length(frac(a), frac(b));
  return TwoBreakPL{a, b, 1.0 / (w1 + sigma_a * (1.0 - w1)), offset};
}

/// Two Möbius pieces on [a,b] and [b,a+1] with prescribed jump ratios.
/// `shape` splits the curvature between the two pieces.
struct TwoBreakMoebius {
  double a = 0.0;
  double b = 0.5;
  double sigma_a = 2.0;
  double sigma_b = 1.0;
  double shape = 0.5;
  double offset = 0.0;  ///< f̂(a) - a
};

struct OneBreakMoebius {
  double b = 0.0;
  double sigma = 2.0;
  double offset = 0.0;  ///< f̂(b) - b
};

using FamilyDescriptor = std::variant<RigidRotation, TwoBreakPL, TwoBreakMoebius, OneBreakMoebius>;

inline double descriptor_offset(const FamilyDescriptor& d) {
  return std::visit(
      [](const auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, RigidRotation>)
          return x.rho;
        else
          return x.offset;
      },
      d);
}

inline FamilyDescriptor with_offset(FamilyDescriptor d, double t) {
  std::visit(
      [t](auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, RigidRotation>)
          x.rho = t;
        else
          x.offset = t;
      },
      d);
  return d;
}

namespace detail {

inline bool genuine_jump(double sigma) { return std::abs(std::log(sigma)) > 1e-14; }

inline PHomeomorphism checked(PHomeomorphism f) {
  auto rep = validate(f);
  if (!rep.valid) throw Error(ErrorKind::InfeasibleDescriptor, rep.violations.front());
  return f;
}

inline PHomeomorphism build(const RigidRotation& d) {
  return PHomeomorphism({MapPiece{}}, {}, d.rho);
}

inline PHomeomorphism build(const TwoBreakPL& d) {
  double a = frac(d.a);
  double w1 = arc_length(a, d.b);
  double h1 = d.interior_slope * w1;
  if (!(w1 > 0) || !(d.interior_slope > 0) || !(h1 < 1.0))
    throw Error(ErrorKind::InfeasibleDescriptor, "TwoBreakPL needs 0 < slope*(b-a) < 1");
  MapPiece p1{a, a + w1, a, h1, 1.0, PieceKind::Affine};
  MapPiece p2{a + w1, a + 1.0, a + h1, 1.0 - h1, 1.0, PieceKind::Affine};
  std::vector<double> br;
  if (genuine_jump(p1.slope() / p2.slope())) br = {a, frac(a + w1)};
  return checked(PHomeomorphism({p1, p2}, br, d.offset));
}

inline PHomeomorphism build(const TwoBreakMoebius& d) {
  if (!(d.sigma_a > 0) || !(d.sigma_b > 0) || !std::isfinite(d.sigma_a * d.sigma_b))
    throw Error(ErrorKind::InfeasibleDescriptor, "jump ratios must be positive");
  double a = frac(d.a);
  double w1 = arc_length(a, d.b);
  double w2 = 1.0 - w1;
  if (!(w1 > 1e-9) || !(w2 > 1e-9)) throw Error(ErrorKind::InfeasibleDescriptor, "breaks must be distinct");
  double prod = std::sqrt(d.sigma_a * d.sigma_b);  // = kappa1 * kappa2
  double k1 = std::pow(prod, d.shape);
  double k2 = prod / k1;
  double r = std::sqrt(d.sigma_a / d.sigma_b);  // slope2 / slope1
  double s1 = 1.0 / (w1 + w2 * r);
  double h1 = s1 * w1;
  if (!(h1 > 0) || !(h1 < 1.0) || !(k1 > 0) || !(k2 > 0))
    throw Error(ErrorKind::InfeasibleDescriptor, "no monotone Möbius pieces for these jump ratios");
  auto kind = [](double k) { return k == 1.0 ? PieceKind::Affine : PieceKind::Moebius; };
  MapPiece p1{a, a + w1, a, h1, k1, kind(k1)};
  MapPiece p2{a + w1, a + 1.0, a + h1, 1.0 - h1, k2, kind(k2)};
  std::vector<double> br;
  if (genuine_jump(d.sigma_a)) br.push_back(a);
  if (genuine_jump(d.sigma_b)) br.push_back(frac(a + w1));
  return checked(PHomeomorphism({p1, p2}, br, d.offset));
}

inline PHomeomorphism build(const OneBreakMoebius& d) {
  if (!(d.sigma > 0)) throw Error(ErrorKind::InfeasibleDescriptor, "jump ratio must be positive");
  double b = frac(d.b);
  double k = std::sqrt(d.sigma);
  MapPiece p{b, b + 1.0, b, 1.0, k, k == 1.0 ? PieceKind::Affine : PieceKind::Moebius};
  std::vector<double> br;
  if (genuine_jump(d.sigma)) br.push_back(b);
  return checked(PHomeomorphism({p}, br, d.offset));
}

}  // namespace detail

inline PHomeomorphism build_family(const FamilyDescriptor& d) {
  return std::visit([](const auto& x) { return detail::build(x); }, d);
}

/// Product of all jump ratios of f.
inline double jump_product(const PHomeomorphism& f) {
  double p = 1.0;
  for (const auto& b : f.breaks()) p *= b.jump_ratio();
  return p;
}

}  // namespace breaklab
