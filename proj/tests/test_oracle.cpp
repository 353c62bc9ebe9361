#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "alphaproj/forward_projection.hpp"
#include "alphaproj/oracle.hpp"
#include "support.hpp"

using namespace alphaproj;
using alphaproj::testing::row;
using alphaproj::testing::vec;

namespace {

using P = ProbMeasure<double>;

MemberFunction binomial2() {
  return [](const Vector<double>& theta) { return binomial_member<double>(2, theta(0)); };
}

ThetaGrid unit_interval(double step) { return {{step}, {1.0 - step}, step}; }

}  // namespace

TEST(GridForwardOracle, SupportShrinkageExample) {
  const LinearFamily<double> family(row({1, -3, -5, -6}));
  const auto res = grid_forward_oracle(family, P::uniform(4), Alpha(2.0));
  EXPECT_LE(total_variation(res.p, P{0.75, 0.25, 0.0, 0.0}), 2e-3);
  EXPECT_TRUE(family.contains(res.p));
}

TEST(GridForwardOracle, ReferenceInFamily) {
  const P r{0.3, 0.4, 0.3};
  const auto res = grid_forward_oracle(LinearFamily<double>(row({-1, 0, 1})), r, Alpha(0.5));
  EXPECT_NEAR(res.value, 0.0, 1e-12);
  EXPECT_LE(total_variation(res.p, r), 1e-6);
}

TEST(GridForwardOracle, AgreesWithSolverOnCenteredInstance) {
  const LinearFamily<double> family(row({-1, 0, 1}));
  const P r{0.2, 0.3, 0.5};
  const auto oracle = grid_forward_oracle(family, r, Alpha(0.5), {1e-3, 2});
  const auto solver = forward_project(family, r, Alpha(0.5));
  EXPECT_LE(total_variation(oracle.p, solver.q), 2e-3);
  EXPECT_NEAR(oracle.value, solver.divergence, 1e-6);
}

TEST(GridForwardOracle, StableUnderStepHalving) {
  const LinearFamily<double> family(row({-1, 0.5, 1, -0.2}));
  const P r{0.1, 0.2, 0.3, 0.4};
  for (double a : {0.5, 2.0}) {
    const double step = 0.05;
    const auto coarse = grid_forward_oracle(family, r, Alpha(a), {step, 0});
    const auto fine = grid_forward_oracle(family, r, Alpha(a), {step / 2, 0});
    EXPECT_LE(std::abs(coarse.value - fine.value), 10 * step * step);
  }
}

TEST(GridForwardOracle, GuardsTheAlphabetSize) {
  try {
    grid_forward_oracle(LinearFamily<double>::unconstrained(7), P::uniform(7), Alpha(0.5));
    FAIL() << "expected TooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(GridReverseOracle, BinomialBelowTwoHasOneMinimum) {
  const auto minima = grid_reverse_oracle(binomial2(), P::uniform(3), Alpha(2.0), unit_interval(1e-3));
  ASSERT_EQ(minima.size(), 1u);
  EXPECT_NEAR(minima[0].theta(0), 0.5, 1e-6);
}

TEST(GridReverseOracle, BinomialAtFourHasTwoMirroredMinima) {
  const auto minima = grid_reverse_oracle(binomial2(), P::uniform(3), Alpha(4.0), unit_interval(1e-3));
  ASSERT_EQ(minima.size(), 2u);
  EXPECT_NEAR(minima[0].theta(0) + minima[1].theta(0), 1.0, 1e-6);
  // mpmath, 25 digits.
  EXPECT_NEAR(minima[0].theta(0), 0.34232559168486850168571758, 1e-6);
  EXPECT_NEAR(minima[0].value, 0.126034130498717616168, 1e-12);
}

TEST(GridReverseOracle, TargetInFamilyGivesZero) {
  const auto minima = grid_reverse_oracle(binomial2(), binomial_member<double>(2, 0.3), Alpha(0.5), unit_interval(1e-2));
  ASSERT_EQ(minima.size(), 1u);
  EXPECT_NEAR(minima[0].value, 0.0, 1e-12);
  EXPECT_NEAR(minima[0].theta(0), 0.3, 1e-6);
}

TEST(GridReverseOracle, TwoParameterCompassRefinement) {
  const PowerLawFamily<double> family(Alpha(0.5), P::uniform(4),
                                      (Matrix<double>(2, 4) << 1, -1, 0, 0, 0, 0, 1, -1).finished());
  const Vector<double> truth = vec({0.1, -0.2});
  const MemberFunction member = [&](const Vector<double>& theta) { return family.member(theta); };
  const auto minima = grid_reverse_oracle(member, family.member(truth), Alpha(0.5), {{-0.5, -0.5}, {0.5, 0.5}, 0.05});
  ASSERT_EQ(minima.size(), 1u);
  EXPECT_LE((minima[0].theta - truth).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GridReverseOracle, RefinementStaysInTheBox) {
  // The unconstrained minimizer 0.5 lies left of the box.
  const auto one = grid_reverse_oracle(binomial2(), P::uniform(3), Alpha(2.0), {{0.6}, {0.9}, 0.01});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_GE(one[0].theta(0), 0.6);
  EXPECT_NEAR(one[0].theta(0), 0.6, 1e-9);

  const PowerLawFamily<double> family(Alpha(0.5), P::uniform(4),
                                      (Matrix<double>(2, 4) << 1, -1, 0, 0, 0, 0, 1, -1).finished());
  const MemberFunction member = [&](const Vector<double>& theta) { return family.member(theta); };
  const auto two = grid_reverse_oracle(member, family.member(vec({0.1, -0.2})), Alpha(0.5), {{0.2, -0.5}, {0.5, 0.5}, 0.05});
  ASSERT_FALSE(two.empty());
  EXPECT_GE(two[0].theta(0), 0.2);
}

TEST(HighPrecisionDivergence, MatchesDoublePath) {
  EXPECT_EQ(highprec_divergence(vec({0.2, 0.3, 0.5}), vec({0.2, 0.3, 0.5}), 0.5), HighPrecision(0));
  alphaproj::testing::Rng rng(40);
  for (int trial = 0; trial < 100; ++trial) {
    const P p = alphaproj::testing::random_measure(rng, 4, 0.1);
    const P q = alphaproj::testing::random_measure(rng, 4, 0.1);
    const double a = alphaproj::testing::uniform(rng, 0.2, 4.0);
    const double hp = static_cast<double>(highprec_divergence(p.weights(), q.weights(), a));
    EXPECT_NEAR(relative_alpha_entropy(p, q, Alpha(a)).value / hp, 1.0, 1e-12);
  }
}

TEST(HighPrecisionDivergence, ReproducesThePythagoreanPair) {
  const Vector<double> p = vec({0.8227, 0.0625, 0.0536, 0.0612});
  const Vector<double> q = vec({0.75, 0.25, 0.0, 0.0});
  const Vector<double> r = vec({0.25, 0.25, 0.25, 0.25});
  const double lhs = static_cast<double>(highprec_divergence(p, r, 2.0));
  const double rhs = static_cast<double>(highprec_divergence(p, q, 2.0) + highprec_divergence(q, r, 2.0));
  EXPECT_NEAR(lhs, 1.0114, 5e-4);
  EXPECT_NEAR(rhs, 0.9871, 5e-4);
}
