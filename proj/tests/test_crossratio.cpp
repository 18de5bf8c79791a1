#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "breaklab/crossratio.hpp"
#include "breaklab/generic_map.hpp"
#include "breaklab/partition.hpp"
#include "breaklab/rotation.hpp"
#include "support.hpp"

using namespace breaklab;
using testing_support::random_descriptor;

namespace {

long double cr_oracle(long double a, long double b, long double c, long double d) {
  return ((b - a) * (d - c)) / ((c - a) * (d - b));
}

// Quadruple at x with gaps in the fixed proportions 0.2 : 0.35 : 0.45 of s.
Quadruple shaped(double x, double s) {
  return Quadruple::from_lifts(x, x + 0.2 * s, x + 0.55 * s, x + s);
}

}  // namespace

TEST(CrossRatio, Examples) {
  EXPECT_DOUBLE_EQ(cross_ratio(Quadruple::from_lifts(0, 0.25, 0.5, 0.75)), 0.25);
  EXPECT_DOUBLE_EQ(cross_ratio(Quadruple::from_lifts(0.0, 1.0 / 4, 2.0 / 4, 3.0 / 4)), 0.25);
  EXPECT_NEAR(cross_ratio(Quadruple::from_points(0.9, 0.1, 0.3, 0.5)),
              static_cast<double>(cr_oracle(0.9L, 1.1L, 1.3L, 1.5L)), 1e-15);
}

TEST(CrossRatio, RejectsDegenerate) {
  EXPECT_THROW(Quadruple::from_lifts(0, 0.2, 0.2, 0.5), Error);
  EXPECT_THROW(Quadruple::from_lifts(0, 0.2, 0.5, 1.0), Error);
  try {
    Quadruple::from_points(0.1, 0.3, 0.2, 0.4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateQuadruple);
  }
}

TEST(CrossRatio, MatchesOracleAndScaleFree) {
  UniformSource u(201);
  for (int i = 0; i < 2000; ++i) {
    double z1 = u.uniform(-2.0, 2.0);
    double g1 = u.uniform(1e-3, 0.3), g2 = u.uniform(1e-3, 0.3), g3 = u.uniform(1e-3, 0.3);
    auto q = Quadruple::from_lifts(z1, z1 + g1, z1 + g1 + g2, z1 + g1 + g2 + g3);
    double cr = cross_ratio(q);
    EXPECT_NEAR(cr, static_cast<double>(cr_oracle(q[0], q[1], q[2], q[3])), 1e-12);
    EXPECT_GT(cr, 0.0);
    EXPECT_LT(cr, 1.0);
    double s = u.uniform(0.1, 0.99 / q.span());
    auto qs = Quadruple::from_lifts(s * q[0], s * q[1], s * q[2], s * q[3]);
    EXPECT_NEAR(cross_ratio(qs), cr, 1e-12);
  }
}

TEST(Distortion, AffineAndMoebiusInvariance) {
  auto pl = build_family(TwoBreakPL{0.25, 0.75, 0.5, 0.225});
  EXPECT_NEAR(distortion(Quadruple::from_lifts(0.3, 0.4, 0.5, 0.7), pl), 1.0, 1e-12);
  auto mb = build_family(OneBreakMoebius{0.0, 5.0, 0.3});
  EXPECT_NEAR(distortion(Quadruple::from_lifts(0.05, 0.3, 0.6, 0.95), mb), 1.0, 1e-10);

  UniformSource u(202);
  for (int rep = 0; rep < 200; ++rep) {
    auto f = build_family(random_descriptor(u));
    for (const auto& p : f.pieces()) {
      double w = p.end - p.start;
      double a = p.start + u.uniform(0.0, 0.2) * w;
      double d = p.end - u.uniform(0.0, 0.2) * w;
      double b = a + u.uniform(0.1, 0.45) * (d - a);
      double c = b + u.uniform(0.1, 0.9) * (d - b);
      EXPECT_NEAR(distortion(Quadruple::from_lifts(a, b, c, d), f), 1.0, 1e-10);
    }
  }
}

TEST(Distortion, Multiplicative) {
  UniformSource u(203);
  for (int rep = 0; rep < 100; ++rep) {
    auto f = build_family(random_descriptor(u));
    auto g = build_family(random_descriptor(u));
    Composed<PHomeomorphism, PHomeomorphism> gf{g, f, 0.0};
    double x = u.next(), s = u.uniform(0.01, 0.9);
    auto q = shaped(x, s);
    double lhs = distortion(q, gf);
    double rhs = distortion(q, f) * distortion(q.image(f), g);
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-10);
  }
}

TEST(Distortion, IteratedProductEqualsDirect) {
  UniformSource u(204);
  auto golden = named_target("golden");
  for (int rep = 0; rep < 4; ++rep) {
    auto f = tune_family(random_descriptor(u), golden, 1e-10).map;
    for (int n : {5, 8, 11}) {
      auto q = shaped(u.next(), u.uniform(1e-4, 0.05));
      auto r = iterated_distortion(q, f, golden.cf.qn(n));
      EXPECT_NEAR(r.product / r.direct, 1.0, 1e-7);
    }
  }
}

TEST(Distortion, SmoothExponent) {
  SineDiffeo h{0.5, 0.1};
  for (double x : {0.13, 0.42, 0.77}) {
    std::vector<double> ls, lr;
    for (int k = 6; k <= 14; ++k) {
      double s = std::ldexp(1.0, -k);
      double r = std::abs(distortion(shaped(x, s), h) - 1.0);
      ls.push_back(std::log(s));
      lr.push_back(std::log(r));
    }
    // C^∞ map: Hölder exponent of D²h is 1
    EXPECT_GE(fit_slope(ls, lr), 1.0 + 1.0 - 0.1) << x;
  }
}

TEST(BreakFunctions, Examples) {
  EXPECT_DOUBLE_EQ(g_function(1.0, 4.0), 1.6);
  EXPECT_DOUBLE_EQ(f_function(2.0, 1.0, 0.5), 1.0);
  UniformSource u(205);
  for (int i = 0; i < 1000; ++i) {
    double x = u.uniform(0.01, 50.0), s = std::exp(u.uniform(-3.0, 3.0)), t = u.next();
    EXPECT_NEAR(f_function(x, 0.0, s), g_function(x, s), 1e-14);
    EXPECT_DOUBLE_EQ(f_function(x, t, 1.0), 1.0);
  }
}

TEST(BreakPrediction, ZeroOffsetAndNoJump) {
  auto f = build_family(TwoBreakPL{0.3, 0.8, 0.6, 0.0});
  auto q = Quadruple::from_lifts(0.25, 0.3, 0.4, 0.5);
  auto p = break_distortion_prediction(q, f, f.breaks().front());
  EXPECT_EQ(p.side, BreakSide::Left);
  EXPECT_DOUBLE_EQ(p.geometry.zeta, 0.0);
  EXPECT_NEAR(p.predicted, g_function(p.geometry.xi, f.breaks().front().jump_ratio()), 1e-15);

  BreakPoint smooth{0.3, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(break_distortion_prediction(q, f, smooth).predicted, 1.0);
}

TEST(BreakPrediction, ExactForPiecewiseAffine) {
  UniformSource u(206);
  for (int rep = 0; rep < 300; ++rep) {
    double a = u.next(), w = u.uniform(0.3, 0.7);
    auto f = build_family(two_break_pl_with_jump(a, frac(a + w), std::exp(u.uniform(-2.0, 2.0))));
    const auto& b = f.breaks()[u.next() < 0.5 ? 0 : 1];
    double s = u.uniform(1e-3, 0.1);
    double bl = b.location + std::floor(u.uniform(-1.0, 2.0));
    bool left = u.next() < 0.5;
    Quadruple q = left ? Quadruple::from_lifts(bl - u.uniform(0.01, 1.0) * 0.3 * s, bl + 0.2 * s, bl + 0.6 * s, bl + s)
                       : Quadruple::from_lifts(bl - s, bl - 0.6 * s, bl - 0.2 * s, bl + u.uniform(0.01, 1.0) * 0.3 * s);
    auto p = break_distortion_prediction(q, f, b);
    EXPECT_EQ(p.side, left ? BreakSide::Left : BreakSide::Right);
    EXPECT_NEAR(distortion(q, f) / p.predicted, 1.0, 1e-9);
  }
}

TEST(BreakPrediction, MoebiusResidualLinearInSpan) {
  auto f = build_family(TwoBreakMoebius{0.2, 0.65, 3.0, 0.5, 0.5, 0.1});
  for (bool left : {true, false}) {
    for (const auto& b : f.breaks()) {
      std::vector<double> ls, lr;
      for (int k = 4; k <= 14; ++k) {
        double s = std::ldexp(1.0, -k);
        double bl = b.location;
        auto q = left ? Quadruple::from_lifts(bl - 0.1 * s, bl + 0.2 * s, bl + 0.6 * s, bl + s)
                      : Quadruple::from_lifts(bl - s, bl - 0.6 * s, bl - 0.2 * s, bl + 0.1 * s);
        auto p = break_distortion_prediction(q, f, b);
        ls.push_back(std::log(s));
        lr.push_back(std::log(std::abs(distortion(q, f) - p.predicted)));
      }
      EXPECT_GE(fit_slope(ls, lr), 0.9);
    }
  }
}

TEST(BreakPrediction, Guards) {
  auto f = build_family(TwoBreakPL{0.3, 0.5, 0.6, 0.0});
  auto both = Quadruple::from_lifts(0.25, 0.35, 0.45, 0.55);
  try {
    break_distortion_prediction(both, f, f.breaks().front());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MultipleBreaks);
  }
  auto mid = Quadruple::from_lifts(0.2, 0.25, 0.35, 0.4);
  try {
    break_distortion_prediction(mid, f, f.breaks().front());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BreakInMiddleInterval);
  }
}
