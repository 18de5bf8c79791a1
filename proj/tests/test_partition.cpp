#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "breaklab/partition.hpp"
#include "breaklab/rotation.hpp"
#include "support.hpp"

using namespace breaklab;
using testing_support::random_descriptor;

namespace {

const TargetRho& golden() {
  static const TargetRho g = named_target("golden");
  return g;
}

RotationNumber exact_rho(double v) {
  RotationNumber r;
  r.value = v;
  r.error_bound = 1e-16;
  return r;
}

struct Tuned {
  PHomeomorphism f;
  RotationNumber rho;
};

const std::vector<Tuned>& tuned_maps() {
  static const std::vector<Tuned> maps = [] {
    std::vector<Tuned> v;
    UniformSource u(101);
    for (int i = 0; i < 4; ++i) {
      auto t = tune_family(random_descriptor(u), golden(), 1e-12);
      v.push_back({t.map, t.rho});
    }
    auto pl = tune_family(TwoBreakPL{0.25, 0.75, 0.5, 0.0}, golden(), 1e-12);
    v.push_back({pl.map, pl.rho});
    return v;
  }();
  return maps;
}

// Independent cover check: sorted by left end, each arc ends where the next begins.
double cover_defect(const DynamicalPartition& P) {
  std::vector<PartitionInterval> all = P.long_intervals;
  all.insert(all.end(), P.short_intervals.begin(), P.short_intervals.end());
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.left < b.left; });
  double worst = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i)
    worst = std::max(worst, circle_distance(all[i].right, all[(i + 1) % all.size()].left));
  return worst;
}

}  // namespace

TEST(Partition, RigidGoldenLevelTwo) {
  auto f = build_family(RigidRotation{golden().value});
  auto P = build_dynamical_partition(f, exact_rho(golden().value), golden().cf, 2, 0.0);
  const double rho = golden().value;
  EXPECT_NEAR(P.long_generator().length(), 1.0 - rho, 1e-12);
  EXPECT_NEAR(P.short_generator().length(), 2.0 * rho - 1.0, 1e-12);
  EXPECT_NEAR(P.long_generator().length(), 0.38197, 1e-5);
  EXPECT_NEAR(P.short_generator().length(), 0.23607, 1e-5);
}

TEST(Partition, CountsAndCover) {
  for (const auto& m : tuned_maps()) {
    for (int n = 1; n <= 14; ++n) {
      auto P = build_dynamical_partition(m.f, m.rho, golden().cf, n);
      EXPECT_EQ(P.size(), static_cast<std::size_t>(golden().cf.qn(n) + golden().cf.qn(n - 1)));
      EXPECT_EQ(P.long_intervals.size(), static_cast<std::size_t>(golden().cf.qn(n)));
      EXPECT_NEAR(P.total_length(), 1.0, 1e-10);
      EXPECT_LT(cover_defect(P), 1e-10);
    }
  }
}

TEST(Partition, Refinement) {
  for (const auto& m : tuned_maps()) {
    for (int n = 1; n <= 12; ++n) {
      auto coarse = build_dynamical_partition(m.f, m.rho, golden().cf, n);
      auto fine = build_dynamical_partition(m.f, m.rho, golden().cf, n + 1, coarse.x0);
      EXPECT_LE(refinement_mismatch(coarse, fine, golden().cf.partial_quotient(n + 1)), 1e-10);
      // every fine interval sits inside one coarse interval
      std::vector<PartitionInterval> parents = coarse.long_intervals;
      parents.insert(parents.end(), coarse.short_intervals.begin(), coarse.short_intervals.end());
      auto contained = [&](const PartitionInterval& I) {
        double mid = frac(I.left + 0.5 * I.length());
        for (const auto& J : parents)
          if (in_arc(mid, J.left, J.right)) return I.length() <= J.length() + 1e-12 && in_arc(I.left, J.left, J.right);
        return false;
      };
      for (const auto& I : fine.long_intervals) EXPECT_TRUE(contained(I));
      for (const auto& I : fine.short_intervals) EXPECT_TRUE(contained(I));
    }
  }
}

TEST(Partition, PrecisionGate) {
  auto f = build_family(RigidRotation{golden().value});
  RotationNumber coarse = exact_rho(golden().value);
  coarse.error_bound = 1e-6;
  try {
    build_dynamical_partition(f, coarse, golden().cf, 14);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientRhoPrecision);
  }
  EXPECT_NO_THROW(build_dynamical_partition(f, coarse, golden().cf, 4));
}

TEST(Partition, SeedOnBreakIsMoved) {
  const auto& m = tuned_maps().front();
  double b = m.f.breaks().front().location;
  auto P = build_dynamical_partition(m.f, m.rho, golden().cf, 5, b);
  EXPECT_GT(circle_distance(P.x0, b), 1e-4);
}

TEST(QnSmall, Generators) {
  for (const auto& m : tuned_maps()) {
    for (int n = 2; n <= 11; ++n) {
      auto P = build_dynamical_partition(m.f, m.rho, golden().cf, n);
      const auto& L = P.long_generator();
      const auto& S = P.short_generator();
      EXPECT_TRUE(is_qn_small(L.left, L.right, m.f, golden().cf, n));
      EXPECT_TRUE(is_qn_small_bruteforce(L.left, L.right, m.f, golden().cf.qn(n)));
      EXPECT_TRUE(is_qn_small(S.left, S.right, m.f, golden().cf, n));
      EXPECT_TRUE(is_qn_small_bruteforce(S.left, S.right, m.f, golden().cf.qn(n)));
    }
  }
}

TEST(QnSmall, RigidExample) {
  const double rho = golden().value;
  auto f = build_family(RigidRotation{rho});
  for (int n = 2; n <= 10; ++n) {
    double d = std::abs(golden().cf.qn(n - 1) * rho - golden().cf.pn(n - 1));
    double x = 0.3;
    // the arc from x towards f^{q_{n-1}}(x), slightly shortened
    double y = (n % 2 == 1) ? frac(x + 0.999 * d) : frac(x - 0.999 * d);
    double a = (n % 2 == 1) ? x : y, b = (n % 2 == 1) ? y : x;
    EXPECT_TRUE(is_qn_small(a, b, f, golden().cf, n));
    EXPECT_TRUE(is_qn_small_bruteforce(a, b, f, golden().cf.qn(n)));
  }
}

TEST(QnSmall, CircleMinusPoint) {
  for (const auto& m : tuned_maps())
    for (int n = 2; n <= 8; ++n) {
      EXPECT_FALSE(is_qn_small(0.4, 0.4 - 1e-9, m.f, golden().cf, n));
      EXPECT_FALSE(is_qn_small_bruteforce(0.4, 0.4 - 1e-9, m.f, golden().cf.qn(n)));
    }
}

TEST(QnSmall, AgreesWithBruteForce) {
  UniformSource u(103);
  int agree = 0, total = 0;
  for (const auto& m : tuned_maps()) {
    for (int n = 2; n <= 9; ++n) {
      for (int s = 0; s < 40; ++s) {
        double x = u.next();
        double y = frac(x + std::exp(u.uniform(std::log(1e-4), std::log(0.5))));
        bool fast = is_qn_small(x, y, m.f, golden().cf, n);
        // skip arcs whose iterates touch within rounding
        bool loose = is_qn_small_bruteforce(x, y, m.f, golden().cf.qn(n), 1e-9);
        bool tight = is_qn_small_bruteforce(x, y, m.f, golden().cf.qn(n), -1e-9);
        if (loose != tight) continue;
        ++total;
        agree += (fast == loose);
        EXPECT_EQ(fast, loose) << "n=" << n << " x=" << x << " y=" << y;
      }
    }
  }
  EXPECT_GT(total, 1000);
}

TEST(Preimage, BreakInGenerator) {
  const auto& m = tuned_maps().front();
  auto P = build_dynamical_partition(m.f, m.rho, golden().cf, 6);
  const auto& L = P.long_generator();
  double b = frac(L.left + 0.4 * L.length());
  auto r = qn_preimage_of_break(m.f, P, b);
  EXPECT_EQ(r.index, 0);
  EXPECT_EQ(r.preimage, b);
}

TEST(Preimage, RigidSurrogate) {
  const double rho = golden().value;
  auto f = build_family(RigidRotation{rho});
  for (int n = 3; n <= 11; ++n) {
    auto P = build_dynamical_partition(f, exact_rho(rho), golden().cf, n, 0.0);
    for (double c : {0.05, 0.31, 0.77}) {
      auto r = qn_preimage_of_break(f, P, c);
      // orbit scan oracle: the index l with x_l closest behind c in the right interval
      const auto& I = r.generator == IntervalKind::Long ? P.long_intervals[static_cast<std::size_t>(r.index)]
                                                         : P.short_intervals[static_cast<std::size_t>(r.index)];
      EXPECT_TRUE(in_arc(c, I.left, I.right));
      EXPECT_LT(circle_distance(r.preimage, frac(c - static_cast<double>(r.index) * rho)), 1e-10);
      EXPECT_LT(circle_distance(iterate(f, r.preimage, r.index), c), 1e-10);
    }
  }
}

TEST(Preimage, RoundTripOnTunedMaps) {
  for (const auto& m : tuned_maps()) {
    for (int n = 3; n <= 11; n += 2) {
      auto P = build_dynamical_partition(m.f, m.rho, golden().cf, n);
      for (const auto& b : m.f.breaks()) {
        auto r = qn_preimage_of_break(m.f, P, b.location);
        EXPECT_LT(circle_distance(iterate(m.f, r.preimage, r.index), b.location), 1e-10);
        const auto& gen = r.generator == IntervalKind::Long ? P.long_generator() : P.short_generator();
        EXPECT_TRUE(in_arc(r.preimage, gen.left, gen.right));
      }
    }
  }
}

TEST(MiddlePoint, RigidClosedForm) {
  const double rho = golden().value;
  auto f = build_family(RigidRotation{rho});
  for (int n = 2; n <= 12; ++n) {
    double d = golden().cf.qn(n - 1) * rho - golden().cf.pn(n - 1);
    double a = 0.4;
    auto m = middle_point_t0(f, a, golden().cf.qn(n - 1));
    EXPECT_LT(circle_distance(m.t0, frac(a - d / 2)), 1e-11);
    EXPECT_NEAR(m.length, std::abs(d), 1e-11);
  }
}

TEST(MiddlePoint, Recheck) {
  for (const auto& mp : tuned_maps()) {
    for (int n : {3, 6, 9}) {
      auto q = golden().cf.qn(n - 1);
      double a = 0.61;
      auto m = middle_point_t0(mp.f, a, q);
      EXPECT_NEAR(a - m.window_left, m.window_right - a, 1e-11);
      double img = iterate(mp.f, m.t0, q);
      double other = circle_distance(m.t0, frac(m.window_left)) < 1e-12 ? frac(m.window_right) : frac(m.window_left);
      EXPECT_LT(circle_distance(img, other), 1e-11);
      // the window endpoints are t₀ and its image
      EXPECT_TRUE(circle_distance(m.t0, frac(m.window_left)) < 1e-12 ||
                  circle_distance(m.t0, frac(m.window_right)) < 1e-12);
    }
  }
}

TEST(Decay, Lambda) {
  EXPECT_NEAR(decay_lambda(0.0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_LT(decay_lambda(2.0), 1.0);
  EXPECT_GT(decay_lambda(2.0), decay_lambda(0.0));
}

TEST(Decay, RigidGolden) {
  const double rho = golden().value;
  auto f = build_family(RigidRotation{rho});
  auto rep = decay_report(f, exact_rho(rho), golden().cf, 14);
  EXPECT_NEAR(rep.fitted_rate, rho, 0.01);
  EXPECT_TRUE(rep.within(0.0));
  for (std::size_t i = 1; i < rep.max_lengths.size(); ++i) EXPECT_LT(rep.max_lengths[i], rep.max_lengths[i - 1]);
}

TEST(Decay, TunedMapsBelowLambda) {
  for (const auto& m : tuned_maps()) {
    auto rep = decay_report(m.f, m.rho, golden().cf, 16);
    EXPECT_LE(rep.fitted_rate, rep.lambda + 0.05);
    EXPECT_NEAR(rep.lambda, decay_lambda(total_variation_log_df(m.f)), 1e-15);
  }
}

TEST(Mass, ConcentratesForOneBreak) {
  auto t = tune_family(OneBreakMoebius{0.2, 4.0, 0.0}, golden(), 1e-12);
  double first = mass_concentration(build_dynamical_partition(t.map, t.rho, golden().cf, 4), golden().value);
  double last = mass_concentration(build_dynamical_partition(t.map, t.rho, golden().cf, 18), golden().value);
  EXPECT_LT(last, first);
  auto r = build_family(RigidRotation{golden().value});
  double flat = mass_concentration(build_dynamical_partition(r, exact_rho(golden().value), golden().cf, 10), golden().value);
  EXPECT_NEAR(flat, 0.9, 0.05);
}

TEST(PartitionCsv, HeaderAndRows) {
  auto f = build_family(RigidRotation{golden().value});
  auto P = build_dynamical_partition(f, exact_rho(golden().value), golden().cf, 3, 0.0);
  std::ostringstream os;
  write_partition_csv_header(os);
  write_partition_csv_rows(os, P);
  std::string s = os.str();
  EXPECT_EQ(s.rfind("level,kind,i,left,right,length\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), P.size() + 1);
}
