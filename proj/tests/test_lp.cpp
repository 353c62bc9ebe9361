#include <gtest/gtest.h>

#include "alphaproj/forward_projection.hpp"
#include "alphaproj/lp.hpp"
#include "support.hpp"

using namespace alphaproj;
using alphaproj::testing::row;
using alphaproj::testing::vec;

TEST(SimplexLp, SmallOptimum) {
  // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
  Matrix<double> a(2, 4);
  a << 1, 2, 1, 0, 3, 1, 0, 1;
  const auto lp = solve_lp<double>(a, vec({4, 6}), vec({-1, -1, 0, 0}));
  ASSERT_EQ(lp.status, LpStatus::Optimal);
  EXPECT_NEAR(lp.x(0), 1.6, 1e-12);
  EXPECT_NEAR(lp.x(1), 1.2, 1e-12);
  EXPECT_NEAR(lp.objective, -2.8, 1e-12);
}

TEST(SimplexLp, DetectsInfeasibleAndUnbounded) {
  Matrix<double> a(2, 2);
  a << 1, 1, 1, 1;
  EXPECT_EQ(solve_lp<double>(a, vec({1, 2}), vec({0, 0})).status, LpStatus::Infeasible);
  Matrix<double> b(1, 2);
  b << 1, -1;
  EXPECT_EQ(solve_lp<double>(b, vec({0}), vec({-1, 0})).status, LpStatus::Unbounded);
}

TEST(SimplexLp, RedundantRowsAndNegativeRhs) {
  Matrix<double> a(3, 3);
  a << 1, 1, 1, 2, 2, 2, -1, 0, 1;
  const auto lp = solve_lp<double>(a, vec({1, 2, -0.5}), vec({0, 1, 0}));
  ASSERT_EQ(lp.status, LpStatus::Optimal);
  EXPECT_NEAR(lp.x.sum(), 1.0, 1e-12);
  EXPECT_NEAR(lp.x(2) - lp.x(0), -0.5, 1e-12);
  EXPECT_NEAR(lp.objective, 0.0, 1e-12);
}

TEST(FamilySupport, ExampleFamilyHasFullSupport) {
  const LinearFamily<double> family(row({1, -3, -5, -6}));
  const auto fs = linear_family_support(family);
  EXPECT_EQ(fs.support, (std::vector<Index>{0, 1, 2, 3}));
  EXPECT_TRUE(family.contains(fs.interior));
  EXPECT_TRUE(fs.interior.has_full_support());
}

TEST(FamilySupport, ForcedZeros) {
  // The second row forces p1 = 0.
  Matrix<double> f(2, 3);
  f << 1, 0, -1,
       0, 1, 0;
  const auto fs = linear_family_support(LinearFamily<double>(f));
  EXPECT_EQ(fs.support, (std::vector<Index>{0, 2}));
}

TEST(FamilySupport, EmptyFamilyIsInfeasible) {
  try {
    linear_family_support(LinearFamily<double>(row({1, 2, 3})));
    FAIL() << "expected Infeasible";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST(SampleLinearFamily, SamplesAreMembers) {
  alphaproj::testing::Rng rng(5);
  Matrix<double> f(2, 5);
  f << 1, -1, 0.5, 0.2, -2, 0.3, 0.1, -0.7, 0.4, 0.0;
  const LinearFamily<double> family(f);
  for (const auto& p : sample_linear_family(family, 50, rng)) EXPECT_TRUE(family.contains(p));
}
