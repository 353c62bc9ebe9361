#include <gtest/gtest.h>

#include <cmath>

#include "alphaproj/divergence.hpp"
#include "support.hpp"

using namespace alphaproj;
using alphaproj::testing::Rng;
using alphaproj::testing::random_measure;
using alphaproj::testing::uniform;

namespace {
using P = ProbMeasure<double>;
}

TEST(RelativeAlphaEntropy, ZeroOnTheDiagonal) {
  const P p{0.2, 0.3, 0.5};
  for (double a : {0.5, 2.0}) {
    const auto d = relative_alpha_entropy(p, p, Alpha(a));
    EXPECT_TRUE(d.finite);
    EXPECT_EQ(d.value, 0.0);
  }
}

TEST(RelativeAlphaEntropy, InfinityConditions) {
  EXPECT_FALSE(relative_alpha_entropy(P{1.0, 0.0}, P{0.0, 1.0}, Alpha(0.5)).finite);
  EXPECT_FALSE(relative_alpha_entropy(P{1.0, 0.0}, P{0.0, 1.0}, Alpha(2.0)).finite);
  // alpha > 1 only needs overlapping supports.
  EXPECT_TRUE(relative_alpha_entropy(P{0.5, 0.5, 0.0}, P{0.0, 0.5, 0.5}, Alpha(2.0)).finite);
  EXPECT_FALSE(relative_alpha_entropy(P{0.5, 0.5, 0.0}, P{0.0, 0.5, 0.5}, Alpha(0.5)).finite);
  EXPECT_TRUE(relative_alpha_entropy(P{0.0, 1.0}, P{0.5, 0.5}, Alpha(0.5)).finite);
}

TEST(RelativeAlphaEntropy, FiftyDigitReference) {
  // mpmath, 50 digits, expanded form.
  const double reference = 0.074504572030816553510191607388529023627736558195887;
  const auto d = relative_alpha_entropy(P{0.5, 0.5}, P{0.25, 0.75}, Alpha(0.5));
  EXPECT_NEAR(d.value, reference, 1e-15);
}

TEST(RelativeAlphaEntropy, FormsAgreeProperty) {
  Rng rng(10);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = alphaproj::testing::uniform_index(rng, 2, 6);
    const P p = random_measure(rng, n);
    const P q = random_measure(rng, n);
    double a = uniform(rng, 0.1, 5.0);
    if (std::abs(a - 1.0) < 1e-3) a = 1.5;
    const auto expanded = relative_alpha_entropy(p, q, Alpha(a));
    const auto scaled = relative_alpha_entropy_scaled(p.weights(), q.weights(), Alpha(a));
    ASSERT_TRUE(expanded.finite && scaled.finite);
    EXPECT_NEAR(expanded.value, scaled.value, 1e-10) << "alpha=" << a;
  }
}

TEST(RelativeAlphaEntropy, ScaledFormIgnoresRescaling) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const P p = random_measure(rng, 4);
    const P q = random_measure(rng, 4);
    const Alpha a(uniform(rng, 0.2, 4.0));
    const double base = relative_alpha_entropy_scaled(p.weights(), q.weights(), a).value;
    for (double tau : {0.5, 2.0})
      EXPECT_NEAR(relative_alpha_entropy_scaled(p.weights(), (tau * q.weights()).eval(), a).value, base, 1e-12);
  }
}

TEST(RelativeAlphaEntropy, SmallValueMeansCloseMeasures) {
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const P p = random_measure(rng, 4);
    Vector<double> w = p.weights();
    const double scale = std::pow(10.0, -uniform(rng, 1.0, 8.0));
    for (Index x = 0; x < 4; ++x) w(x) *= 1.0 + scale * uniform(rng, -1.0, 1.0);
    const P q = P::normalized(w);
    for (double a : {0.5, 2.0}) {
      const auto d = relative_alpha_entropy(p, q, Alpha(a));
      EXPECT_GE(d.value, 0.0);
      if (d.value < 1e-10) EXPECT_LT(total_variation(p, q), 1e-5);
    }
  }
}

TEST(KlDivergence, Examples) {
  const P p{0.3, 0.7};
  EXPECT_EQ(kl_divergence(p, p).value, 0.0);
  EXPECT_NEAR(kl_divergence(P{1.0, 0.0}, P{0.5, 0.5}).value, std::log(2.0), 1e-15);
  EXPECT_FALSE(kl_divergence(P{0.5, 0.5}, P{1.0, 0.0}).finite);
  EXPECT_EQ(relative_alpha_entropy(p, P{0.6, 0.4}, Alpha(1.0)).value, kl_divergence(p, P{0.6, 0.4}).value);
}

TEST(KlDivergence, AlphaContinuity) {
  const P p{0.3, 0.7};
  const P q{0.6, 0.4};
  const double kl = kl_divergence(p, q).value;
  EXPECT_NEAR(relative_alpha_entropy(p, q, Alpha(1.0 + 1e-4)).value, kl, 1e-3);
  EXPECT_NEAR(relative_alpha_entropy(p, q, Alpha(1.0 - 1e-4)).value, kl, 1e-3);
}

TEST(RenyiEntropy, Examples) {
  for (double a : {0.3, 1.0, 2.5}) EXPECT_NEAR(renyi_entropy(P::uniform(5), Alpha(a)), std::log(5.0), 1e-12);
  EXPECT_NEAR(renyi_entropy(P{1.0, 0.0, 0.0}, Alpha(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(renyi_entropy(P{0.25, 0.75}, Alpha(2.0)), 0.470003629245735553651, 1e-14);
}

TEST(LogConvexityGap, Examples) {
  const P r{0.2, 0.3, 0.5};
  const P p{0.5, 0.25, 0.25};
  const P q{0.25, 0.5, 0.25};
  EXPECT_EQ(log_convexity_gap(r, p, q, 0.0, Alpha(0.5)), 0.0);
  EXPECT_EQ(log_convexity_gap(r, p, q, 1.0, Alpha(0.5)), 0.0);
  EXPECT_EQ(log_convexity_gap(r, p, p, 0.3, Alpha(0.5)), 0.0);
  // mpmath, 50 digits.
  EXPECT_NEAR(log_convexity_gap(r, p, q, 0.5, Alpha(0.5)), 0.0067270506048616203352824, 1e-14);
}

TEST(LogConvexityGap, RejectsInfiniteTerms) {
  const P r{0.5, 0.5, 0.0};
  const P p{0.0, 0.5, 0.5};
  EXPECT_THROW(log_convexity_gap(r, p, p, 0.5, Alpha(0.5)), Error);
  EXPECT_THROW(log_convexity_gap(P{0.5, 0.5, 0.0}, P{0.5, 0.5, 0.0}, P{0.2, 0.3, 0.5}, 0.5, Alpha(0.5)),
               Error);
}

TEST(LogConvexityGap, SignFollowsAlphaProperty) {
  Rng rng(13);
  for (double a : {0.3, 0.7, 1.5, 4.0}) {
    for (int trial = 0; trial < 500; ++trial) {
      const Index n = alphaproj::testing::uniform_index(rng, 2, 6);
      const P r = random_measure(rng, n);
      const P p = random_measure(rng, n);
      const P q = random_measure(rng, n);
      const double t = uniform(rng, 0.0, 1.0);
      const double gap = log_convexity_gap(r, p, q, t, Alpha(a));
      if (a < 1.0) {
        EXPECT_GE(gap, -1e-10);
      } else {
        EXPECT_LE(gap, 1e-10);
      }
    }
  }
}
