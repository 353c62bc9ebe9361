#include <gtest/gtest.h>

#include "alphaproj/divergence.hpp"
#include "alphaproj/families.hpp"
#include "support.hpp"

using namespace alphaproj;
using alphaproj::testing::Rng;
using alphaproj::testing::row;
using alphaproj::testing::uniform;
using alphaproj::testing::vec;

namespace {

using P = ProbMeasure<double>;

PowerLawFamily<double> example_family(double alpha = 2.0) {
  return PowerLawFamily<double>(Alpha(alpha), P::uniform(4), row({1, -3, -5, -6}));
}

void expect_weights(const P& p, const Vector<double>& expected, double tol) {
  ASSERT_EQ(p.size(), expected.size());
  for (Index x = 0; x < p.size(); ++x) EXPECT_NEAR(p(x), expected(x), tol) << "x=" << x;
}

Vector<double> theta1(double value) { return vec({value}); }

// Half-width of a box of admissible theta around 0 for a one-constraint family.
double admissible_radius(const PowerLawFamily<double>& family) {
  const double a = family.alpha().value();
  if (a == 1.0) return 1.0;
  const Vector<double> rp = family.reference_power();
  double radius = 1e300;
  for (Index x = 0; x < family.alphabet_size(); ++x)
    radius = std::min(radius, rp(x) / std::abs((1 - a) * family.constraints()(0, x)));
  return radius;
}

}  // namespace

TEST(LinearFamily, Membership) {
  const LinearFamily<double> family(row({1, -3, -5, -6}));
  EXPECT_TRUE(linear_membership(family, P{0.75, 0.25, 0.0, 0.0}));
  EXPECT_FALSE(linear_membership(family, P::uniform(4)));
  EXPECT_NEAR(family.violation(P::uniform(4)), 13.0 / 4.0, 1e-14);
  EXPECT_TRUE(linear_membership(LinearFamily<double>::unconstrained(4), P{0.1, 0.2, 0.3, 0.4}));
  EXPECT_THROW(linear_membership(family, P::uniform(3)), Error);
}

TEST(LinearFamily, DropsDependentRows) {
  Matrix<double> f(3, 4);
  f << 1, -3, -5, -6,
       2, -6, -10, -12,
       0, 1, 0, -1;
  const LinearFamily<double> family(f);
  EXPECT_EQ(family.rank(), 2);
  EXPECT_EQ(family.original_rows(), 3);
  EXPECT_EQ(family.kept_rows().size(), 2u);
  EXPECT_TRUE(family.kept_rows().back() == 2);
}

TEST(PowerLawFamily, Examples) {
  const auto family = example_family();
  EXPECT_EQ(family.member(theta1(0.0)), P::uniform(4));
  const double t = 0.1;
  expect_weights(family.member(theta1(t)),
                 vec({0.25 - t, 0.25 + 3 * t, 0.25 + 5 * t, 0.25 + 6 * t}) / (1 + 13 * t), 1e-14);
  EXPECT_THROW(family.member(theta1(0.3)), Error);
  EXPECT_FALSE(family.admissible(theta1(0.3)));
  EXPECT_FALSE(family.admissible(theta1(-1.0 / 23.0)));
  EXPECT_TRUE(family.admissible(theta1(-0.04)));
}

TEST(PowerLawFamily, ZeroReferenceStaysZeroBelowOne) {
  const PowerLawFamily<double> family(Alpha(0.5), P{0.5, 0.5, 0.0}, row({1, -1, 2}));
  const P m = family.member(theta1(0.2));
  EXPECT_EQ(m(2), 0.0);
  EXPECT_THROW(PowerLawFamily<double>(Alpha(2.0), P{0.5, 0.5, 0.0}, row({1, -1, 2})), Error);
}

TEST(PowerLawFamily, ClippedMember) {
  const auto family = example_family();
  expect_weights(family.clipped_member(theta1(-0.05)), vec({0.75, 0.25, 0.0, 0.0}), 1e-14);
  EXPECT_THROW(family.member(theta1(-0.05)), Error);
}

TEST(PowerLawFamily, ExponentialLimit) {
  const PowerLawFamily<double> family(Alpha(1.0), P{0.2, 0.3, 0.5}, row({0, 1, 2}));
  const P m = family.member(theta1(0.7));
  const Vector<double> w = vec({0.2, 0.3 * std::exp(-0.7), 0.5 * std::exp(-1.4)});
  expect_weights(m, w / w.sum(), 1e-15);
}

TEST(PowerLawFamily, LnAlphaConvexProperty) {
  Rng rng(20);
  for (double a : {0.5, 2.0, 3.0}) {
    const PowerLawFamily<double> family{Alpha(a), P{0.1, 0.2, 0.3, 0.4}, row({1, -1, 0.5, -0.25})};
    const double h = 0.9 * admissible_radius(family);
    for (int trial = 0; trial < 200; ++trial) {
      const double t1 = uniform(rng, -h, h);
      const double t2 = uniform(rng, -h, h);
      const double t = uniform(rng, 0.0, 1.0);
      const P mix = ln_alpha_mixture(family.member(theta1(t1)), family.member(theta1(t2)), t, Alpha(a));
      // The mixing weights pick up the normalizers: s ∝ t Z(t1)^(1-alpha).
      const double w1 = t * std::exp((1 - a) * family.log_normalizer(theta1(t1)));
      const double w2 = (1 - t) * std::exp((1 - a) * family.log_normalizer(theta1(t2)));
      const double s = w1 / (w1 + w2);
      expect_weights(mix, family.member(theta1(s * t1 + (1 - s) * t2)).weights(), 1e-10);
    }
  }
}

TEST(PowerLawFamily, ExponentialFamilyIsLogConvex) {
  Rng rng(21);
  const PowerLawFamily<double> family(Alpha(1.0), P{0.2, 0.3, 0.5}, row({0, 1, 2}));
  for (int trial = 0; trial < 100; ++trial) {
    const double t1 = uniform(rng, -2, 2);
    const double t2 = uniform(rng, -2, 2);
    const double t = uniform(rng, 0, 1);
    const P mix = geometric_mixture(family.member(theta1(t1)), family.member(theta1(t2)), t);
    const auto fit = fit_member(family, mix);
    EXPECT_TRUE(fit.ok);
    EXPECT_NEAR(fit.theta(0), t * t1 + (1 - t) * t2, 1e-9);
  }
}

TEST(ExtendedPowerLawFamily, Examples) {
  const ExtendedPowerLawFamily<double> ext(example_family(), theta1(-0.05));
  const P q{0.75, 0.25, 0.0, 0.0};
  EXPECT_TRUE(extended_member_check(ext, q, theta1(-0.05)));
  EXPECT_TRUE(extended_member_check(ext, example_family().member(theta1(0.1)), theta1(0.1)));
  EXPECT_FALSE(extended_member_check(ext, P::uniform(4), theta1(-0.05)));
  EXPECT_FALSE(extended_member_check(ext, P::uniform(4), theta1(0.1)));
}

TEST(OrthogonalLinearFamily, Examples) {
  const auto family = example_family();
  const P in_l{0.8227, 0.0625, 0.0536, 0.0612};
  const auto same = orthogonal_linear_family(family, in_l);
  EXPECT_NEAR((same.original_constraints() - family.constraints()).cwiseAbs().maxCoeff(), 0.0, 1e-14);

  const P p_hat{0.4, 0.3, 0.2, 0.1};
  const Vector<double> tau = tilt_coefficients(family, p_hat);
  EXPECT_NEAR(tau(0), (0.4 - 0.9 - 1.0 - 0.6) / 0.25, 1e-12);
  EXPECT_TRUE(linear_membership(orthogonal_linear_family(family, p_hat), p_hat));
}

TEST(OrthogonalLinearFamily, TwoConstraintsContainTheTarget) {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix<double> f(2, 5);
    for (Index i = 0; i < 2; ++i)
      for (Index x = 0; x < 5; ++x) f(i, x) = uniform(rng, -1, 1);
    const double a = trial % 2 ? 0.5 : 2.5;
    const PowerLawFamily<double> family{Alpha(a), alphaproj::testing::random_measure(rng, 5), f};
    const P p_hat = alphaproj::testing::random_measure(rng, 5);
    EXPECT_TRUE(linear_membership(orthogonal_linear_family(family, p_hat), p_hat));
  }
}

TEST(OrthogonalLinearFamily, GeneratesTheSamePowerLawFamily) {
  Rng rng(23);
  for (double a : {0.5, 2.0}) {
    Matrix<double> f(2, 4);
    f << 1, -1, 0.5, 0.2, 0.3, 0.1, -0.7, 0.4;
    const PowerLawFamily<double> base{Alpha(a), P{0.1, 0.2, 0.3, 0.4}, f};
    const P p_hat{0.3, 0.3, 0.2, 0.2};
    const PowerLawFamily<double> tilted{Alpha(a), base.reference(), tilted_constraints(base, p_hat)};
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const Vector<double> theta = vec({uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1)});
      if (base.admissible(theta)) {
        const auto fit = fit_member(tilted, base.member(theta));
        EXPECT_TRUE(fit.ok);
        EXPECT_LE(fit.residual, 1e-8);
        ++checked;
      }
      if (tilted.admissible(theta)) {
        const auto fit = fit_member(base, tilted.member(theta));
        EXPECT_TRUE(fit.ok);
        EXPECT_LE(fit.residual, 1e-8);
      }
    }
    EXPECT_GT(checked, 50);
  }
}

TEST(Reparametrize, Examples) {
  const auto family = example_family();
  const auto same = reparametrize(family, theta1(0.0));
  EXPECT_EQ(same.reference(), family.reference());

  const auto moved = reparametrize(family, theta1(0.1));
  const Vector<double> xi = reparametrized_theta(family, theta1(0.1), theta1(0.05));
  EXPECT_NEAR(xi(0), (0.05 - 0.1) / 2.3, 1e-14);
  expect_weights(moved.member(xi), family.member(theta1(0.05)).weights(), 1e-10);
}

TEST(Reparametrize, SetEqualityOnAGridProperty) {
  for (double a : {0.5, 2.0, 4.0}) {
    const PowerLawFamily<double> family{Alpha(a), P{0.1, 0.2, 0.3, 0.4}, row({1, -1, 0.5, -0.25})};
    const double h = admissible_radius(family);
    const Vector<double> star = theta1(0.4 * h);
    const auto moved = reparametrize(family, star);
    const auto back = reparametrize(moved, reparametrized_theta(family, star, theta1(0.0)));
    int count = 0;
    for (int i = 0; i < 100; ++i) {
      const Vector<double> theta = theta1(h * (-0.99 + 0.0198 * i));
      if (!family.admissible(theta)) continue;
      ++count;
      const Vector<double> xi = reparametrized_theta(family, star, theta);
      expect_weights(moved.member(xi), family.member(theta).weights(), 1e-10);
      const Vector<double> zeta = reparametrized_theta(moved, reparametrized_theta(family, star, theta1(0.0)), xi);
      expect_weights(back.member(zeta), family.member(theta).weights(), 1e-10);
    }
    EXPECT_GE(count, 50);
  }
}

TEST(BinomialMember, Shape) {
  expect_weights(binomial_member<double>(2, 0.3), vec({0.49, 0.42, 0.09}), 1e-14);
  EXPECT_THROW(binomial_member<double>(2, 1.0), Error);
}
