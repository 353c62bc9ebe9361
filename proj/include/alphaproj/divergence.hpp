#ifndef ALPHAPROJ_DIVERGENCE_HPP
#define ALPHAPROJ_DIVERGENCE_HPP

#include <cmath>

#include "alphaproj/measures.hpp"

namespace alphaproj {

/// A divergence value in [0, +inf]. Infinity is a value, not an error, so
/// that minimizers can rank candidates uniformly.
template <typename Scalar>
struct DivergenceValue {
  Scalar value{0};
  bool finite{true};

  static DivergenceValue infinite() { return {detail::infinity<Scalar>(), false}; }
  static DivergenceValue of(Scalar v) {
    using std::max;
    return {max(v, Scalar(0)), true};
  }

  friend bool operator<(const DivergenceValue& a, const DivergenceValue& b) {
    return a.value < b.value;
  }
};

/// I(P||Q) = sum_x P(x) log(P(x)/Q(x)) with 0 log(0/q) = 0 and +inf when P is
/// not absolutely continuous with respect to Q.
template <typename Scalar>
DivergenceValue<Scalar> kl_divergence(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& q) {
  using std::log;
  require_same_size(p, q);
  if (!absolutely_continuous(p, q)) return DivergenceValue<Scalar>::infinite();
  if (p == q) return DivergenceValue<Scalar>::of(Scalar(0));
  Scalar sum(0);
  for (Index x = 0; x < p.size(); ++x)
    if (p.in_support(x)) sum += p(x) * (log(p(x)) - log(q(x)));
  return DivergenceValue<Scalar>::of(sum);
}

/// Relative alpha-entropy in its expanded form
///
///   alpha/(1-alpha) log sum P Q^(alpha-1) - 1/(1-alpha) log sum P^alpha + log sum Q^alpha.
///
/// It is +inf when alpha < 1 and P is not absolutely continuous w.r.t. Q, or
/// when alpha > 1 and the supports are disjoint. alpha = 1 dispatches to KL.
/// Terms with P(x) = 0 contribute nothing, whatever Q(x)^(alpha-1) is.
template <typename Scalar>
DivergenceValue<Scalar> relative_alpha_entropy(const ProbMeasure<Scalar>& p,
                                               const ProbMeasure<Scalar>& q, Alpha<Scalar> alpha) {
  using std::log;
  if (alpha.is_one()) return kl_divergence(p, q);
  require_same_size(p, q);
  const Scalar a = alpha.value();
  if (alpha.below_one() && !absolutely_continuous(p, q)) return DivergenceValue<Scalar>::infinite();
  if (alpha.above_one() && singular(p, q)) return DivergenceValue<Scalar>::infinite();
  if (p == q) return DivergenceValue<Scalar>::of(Scalar(0));

  Vector<Scalar> cross(p.size());
  for (Index x = 0; x < p.size(); ++x) {
    cross(x) = (p.in_support(x) && q.in_support(x)) ? log(p(x)) + (a - Scalar(1)) * log(q(x))
                                                    : -detail::infinity<Scalar>();
  }
  const Scalar log_cross = detail::log_sum_exp(cross);
  const Scalar log_p = log_power_sum(p.weights(), a);
  const Scalar log_q = log_power_sum(q.weights(), a);
  const Scalar value =
      a / (Scalar(1) - a) * log_cross - log_p / (Scalar(1) - a) + log_q;
  return DivergenceValue<Scalar>::of(value);
}

/// The same quantity through the norm-scaled form
///
///   alpha/(1-alpha) log sum (P/||P||) (Q/||Q||)^(alpha-1),
///
/// which is well defined for any pair of positive measures; rescaling either
/// argument leaves it unchanged.
template <typename Scalar>
DivergenceValue<Scalar> relative_alpha_entropy_scaled(const Vector<Scalar>& p,
                                                      const Vector<Scalar>& q,
                                                      Alpha<Scalar> alpha) {
  using std::exp;
  using std::log;
  require(p.size() == q.size(), ErrorCode::DimensionMismatch, "size mismatch");
  require(!alpha.is_one(), ErrorCode::InvalidArgument, "scaled form needs alpha != 1");
  require((p.array() >= Scalar(0)).all() && (q.array() >= Scalar(0)).all(),
          ErrorCode::InvalidMeasure, "positive measures required");
  const Scalar a = alpha.value();
  bool overlap = false;
  bool p_outside_q = false;
  for (Index x = 0; x < p.size(); ++x) {
    overlap = overlap || (p(x) > Scalar(0) && q(x) > Scalar(0));
    p_outside_q = p_outside_q || (p(x) > Scalar(0) && q(x) == Scalar(0));
  }
  if (alpha.below_one() && p_outside_q) return DivergenceValue<Scalar>::infinite();
  if (alpha.above_one() && !overlap) return DivergenceValue<Scalar>::infinite();

  const Scalar log_norm_p = log_power_sum(p, a) / a;
  const Scalar log_norm_q = log_power_sum(q, a) / a;
  Vector<Scalar> terms(p.size());
  for (Index x = 0; x < p.size(); ++x) {
    terms(x) = (p(x) > Scalar(0) && q(x) > Scalar(0))
                   ? (log(p(x)) - log_norm_p) + (a - Scalar(1)) * (log(q(x)) - log_norm_q)
                   : -detail::infinity<Scalar>();
  }
  return DivergenceValue<Scalar>::of(a / (Scalar(1) - a) * detail::log_sum_exp(terms));
}

/// Renyi entropy (1/(1-alpha)) log sum P^alpha; Shannon entropy at alpha = 1.
template <typename Scalar>
Scalar renyi_entropy(const ProbMeasure<Scalar>& p, Alpha<Scalar> alpha) {
  using std::log;
  if (alpha.is_one()) {
    Scalar h(0);
    for (Index x = 0; x < p.size(); ++x)
      if (p.in_support(x)) h -= p(x) * log(p(x));
    return h;
  }
  return log_power_sum(p.weights(), alpha.value()) / (Scalar(1) - alpha.value());
}

/// sum_x P'(x)^t Q'(x)^(1-t) for the escorts P', Q'. Bounded by one (Hoelder).
template <typename Scalar>
Scalar escort_hoelder_sum(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& q, Scalar t,
                          Alpha<Scalar> alpha) {
  using std::exp;
  using std::log;
  const ProbMeasure<Scalar> pe = escort(p, alpha);
  const ProbMeasure<Scalar> qe = escort(q, alpha);
  Scalar sum(0);
  for (Index x = 0; x < p.size(); ++x) {
    if (pe.in_support(x) && qe.in_support(x))
      sum += exp(t * log(pe(x)) + (Scalar(1) - t) * log(qe(x)));
  }
  return sum;
}

/// Left side minus right side of the log-convexity inequality
///
///   t I(R,P) + (1-t) I(R,Q) >= I(R, mix_t(P,Q)) - log sum P'^t Q'^(1-t).
///
/// Nonnegative for alpha < 1 and nonpositive for alpha > 1. P and Q must be
/// mutually absolutely continuous and every divergence term finite.
template <typename Scalar>
Scalar log_convexity_gap(const ProbMeasure<Scalar>& r, const ProbMeasure<Scalar>& p,
                         const ProbMeasure<Scalar>& q, Scalar t, Alpha<Scalar> alpha) {
  using std::log;
  require_same_size(r, p);
  require_same_size(p, q);
  require(t >= Scalar(0) && t <= Scalar(1), ErrorCode::InvalidArgument, "t must lie in [0,1]");
  require(absolutely_continuous(p, q) && absolutely_continuous(q, p), ErrorCode::InvalidArgument,
          "P and Q must be mutually absolutely continuous");
  require(!singular(r, p) && !singular(r, q), ErrorCode::SingularPair,
          "R must not be singular with respect to P or Q");

  const auto to_r_p = relative_alpha_entropy(r, p, alpha);
  const auto to_r_q = relative_alpha_entropy(r, q, alpha);
  if (!to_r_p.finite || !to_r_q.finite)
    throw Error(ErrorCode::InfiniteTerm, "a divergence term of the inequality is infinite");
  if (t == Scalar(0) || t == Scalar(1) || p == q) return Scalar(0);

  const auto to_mix = relative_alpha_entropy(r, geometric_mixture(p, q, t), alpha);
  if (!to_mix.finite)
    throw Error(ErrorCode::InfiniteTerm, "divergence to the mixture is infinite");
  return t * to_r_p.value + (Scalar(1) - t) * to_r_q.value - to_mix.value +
         log(escort_hoelder_sum(p, q, t, alpha));
}

}  // namespace alphaproj

#endif  // ALPHAPROJ_DIVERGENCE_HPP
