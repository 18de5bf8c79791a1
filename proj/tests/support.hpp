#pragma once

// Independent oracles and hand-rolled generators shared by the test suites.

#include <cmath>
#include <cstdint>
#include <vector>

#include "breaklab/detail/random.hpp"
#include "breaklab/maps.hpp"

namespace testing_support {

using namespace breaklab;

/// Continued fraction of num/den by integer Euclid, as a plain list of quotients.
inline std::vector<std::int64_t> euclid_quotients(std::int64_t num, std::int64_t den) {
  std::vector<std::int64_t> k;
  while (num != 0) {
    k.push_back(den / num);
    std::int64_t r = den % num;
    den = num;
    num = r;
  }
  return k;
}

/// (f̂^N(0))/N mod 1 by plain iteration of the lift.
template <class M>
double long_orbit_rho(const M& f, std::int64_t N) {
  double t = 0.0;
  std::int64_t wind = 0;
  for (std::int64_t i = 0; i < N; ++i) {
    t = f.lift(t);
    double k = std::floor(t);
    wind += static_cast<std::int64_t>(k);
    t -= k;
  }
  double tau = (static_cast<double>(wind) + t) / static_cast<double>(N);
  return tau - std::floor(tau);
}

/// Central difference of the lift.
template <class M>
double central_difference(const M& f, double x, double h = 1e-6) {
  return (f.lift(x + h) - f.lift(x - h)) / (2.0 * h);
}

/// Random admissible descriptor: PL, two-break Möbius or one-break Möbius with
/// jump ratios on both sides of 1.
inline FamilyDescriptor random_descriptor(UniformSource& u) {
  double pick = u.next();
  double a = u.uniform(0.0, 1.0);
  double w = u.uniform(0.15, 0.85);
  double b = a + w - std::floor(a + w);
  auto sigma = [&] { return std::exp(u.uniform(-1.5, 1.5)); };
  if (pick < 0.34) return two_break_pl_with_jump(a, b, sigma());
  if (pick < 0.67) return TwoBreakMoebius{a, b, sigma(), sigma(), u.uniform(0.0, 1.0), 0.0};
  return OneBreakMoebius{a, sigma(), 0.0};
}

/// Orbit seed avoiding breaks of f by at least 1e-12 for `steps` iterates.
inline double break_free_seed(const PHomeomorphism& f, UniformSource& u, std::int64_t steps) {
  for (;;) {
    double x = u.next();
    double y = x;
    bool ok = true;
    for (std::int64_t i = 0; i < steps && ok; ++i) {
      for (const auto& b : f.breaks())
        if (circle_distance(y, b.location) < 1e-12) ok = false;
      y = f.eval(y);
    }
    if (ok) return x;
  }
}

}  // namespace testing_support
