#ifndef ALPHAPROJ_TESTS_SUPPORT_HPP
#define ALPHAPROJ_TESTS_SUPPORT_HPP

// Seeded generators shared by the property tests.

#include <random>

#include "alphaproj/measures.hpp"

namespace alphaproj::testing {

using Rng = std::mt19937_64;

inline ProbMeasure<double> random_measure(Rng& rng, Index n, double floor = 0.0) {
  std::exponential_distribution<double> draw(1.0);
  Vector<double> w(n);
  for (Index x = 0; x < n; ++x) w(x) = floor + draw(rng);
  return ProbMeasure<double>::normalized(w);
}

/// Random measure with roughly a third of the coordinates zeroed, keeping at
/// least one positive weight.
inline ProbMeasure<double> random_sparse_measure(Rng& rng, Index n) {
  std::exponential_distribution<double> draw(1.0);
  std::bernoulli_distribution drop(0.33);
  Vector<double> w(n);
  for (Index x = 0; x < n; ++x) w(x) = drop(rng) ? 0.0 : draw(rng);
  if (w.sum() == 0.0) w(std::uniform_int_distribution<Index>(0, n - 1)(rng)) = 1.0;
  return ProbMeasure<double>::normalized(w);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline Vector<double> vec(std::initializer_list<double> values) {
  Vector<double> v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double value : values) v(i++) = value;
  return v;
}

/// Constraint rows g_i - (sum_x P0 g_i) 1 for random g and a random
/// full-support P0, so P0 is a member of the family.
inline Matrix<double> random_constraints(Rng& rng, Index k, Index n) {
  const ProbMeasure<double> p0 = random_measure(rng, n, 0.2);
  Matrix<double> f(k, n);
  for (Index i = 0; i < k; ++i) {
    for (Index x = 0; x < n; ++x) f(i, x) = uniform(rng, -1.0, 1.0);
    f.row(i).array() -= f.row(i).dot(p0.weights());
  }
  return f;
}

inline Matrix<double> row(std::initializer_list<double> values) {
  return vec(values).transpose();
}

}  // namespace alphaproj::testing

#endif  // ALPHAPROJ_TESTS_SUPPORT_HPP
