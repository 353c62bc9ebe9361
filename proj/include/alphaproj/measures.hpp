#ifndef ALPHAPROJ_MEASURES_HPP
#define ALPHAPROJ_MEASURES_HPP

// Probability measures on a finite alphabet together with the escort
// transform, the generalized logarithm/exponential pair and the two mixture
// operations (geometric and ln_alpha) that define log-convex and
// ln_alpha-convex families.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "alphaproj/errors.hpp"

namespace alphaproj {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Weights whose sum is within this distance of one are silently renormalized.
inline constexpr double kRenormalizeTolerance = 1e-9;

class Alphabet {
 public:
  explicit Alphabet(Index size) : size_(size) {
    require(size >= 2, ErrorCode::InvalidArgument, "alphabet needs at least two symbols");
  }
  explicit Alphabet(std::vector<std::string> labels)
      : Alphabet(static_cast<Index>(labels.size())) {
    labels_ = std::move(labels);
  }

  Index size() const { return size_; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::string label(Index x) const {
    return labels_.empty() ? std::to_string(x) : labels_[static_cast<std::size_t>(x)];
  }

 private:
  Index size_;
  std::vector<std::string> labels_;
};

/// The order parameter alpha > 0. alpha == 1 is legal and selects the
/// Kullback-Leibler / exponential-family limit wherever one exists.
template <typename Scalar>
class Alpha {
 public:
  explicit Alpha(Scalar value) : value_(value) {
    using std::isfinite;
    require(isfinite(value) && value > Scalar(0), ErrorCode::InvalidArgument,
            "alpha must be a finite positive number");
  }

  Scalar value() const { return value_; }
  bool is_one() const { return value_ == Scalar(1); }
  bool below_one() const { return value_ < Scalar(1); }
  bool above_one() const { return value_ > Scalar(1); }

 private:
  Scalar value_;
};

template <typename Scalar>
Alpha(Scalar) -> Alpha<Scalar>;

namespace detail {

template <typename Scalar>
Scalar infinity() {
  return std::numeric_limits<Scalar>::infinity();
}

/// log(sum_i exp(v_i)) over the entries of v that are not -inf.
template <typename Scalar>
Scalar log_sum_exp(const Vector<Scalar>& v) {
  using std::exp;
  using std::log;
  Scalar top = -infinity<Scalar>();
  for (Index i = 0; i < v.size(); ++i) top = std::max(top, v(i));
  if (top == -infinity<Scalar>() || top == infinity<Scalar>()) return top;
  Scalar acc(0);
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) != -infinity<Scalar>()) acc += exp(v(i) - top);
  }
  return top + log(acc);
}

/// log of p^e with the conventions 0^e = 0 (e > 0), 0^0 = 1, 0^e = inf (e < 0).
template <typename Scalar>
Scalar log_pow(Scalar p, Scalar e) {
  using std::log;
  if (p > Scalar(0)) return e * log(p);
  if (e > Scalar(0)) return -infinity<Scalar>();
  if (e == Scalar(0)) return Scalar(0);
  return infinity<Scalar>();
}

}  // namespace detail

template <typename Scalar>
class ProbMeasure {
 public:
  /// Validates the weights. A sum off by at most 1e-9 is renormalized;
  /// anything worse, or a negative or non-finite weight, is rejected.
  explicit ProbMeasure(Vector<Scalar> weights) : weights_(std::move(weights)) {
    using std::abs;
    using std::isfinite;
    require(weights_.size() >= 2, ErrorCode::InvalidMeasure,
            "a measure needs at least two symbols");
    Scalar total(0);
    for (Index x = 0; x < weights_.size(); ++x) {
      require(isfinite(weights_(x)), ErrorCode::InvalidMeasure, "non-finite weight");
      require(weights_(x) >= Scalar(0), ErrorCode::InvalidMeasure, "negative weight");
      total += weights_(x);
    }
    require(abs(total - Scalar(1)) <= Scalar(kRenormalizeTolerance), ErrorCode::InvalidMeasure,
            "weights do not sum to one");
    weights_ /= total;
  }

  ProbMeasure(std::initializer_list<Scalar> weights) : ProbMeasure(from_list(weights)) {}

  /// Normalizes an arbitrary nonnegative vector with positive total mass.
  static ProbMeasure normalized(const Vector<Scalar>& mass) {
    using std::isfinite;
    Scalar total(0);
    for (Index x = 0; x < mass.size(); ++x) {
      require(isfinite(mass(x)) && mass(x) >= Scalar(0), ErrorCode::InvalidMeasure,
              "mass must be finite and nonnegative");
      total += mass(x);
    }
    require(total > Scalar(0), ErrorCode::InvalidMeasure, "mass has zero total");
    return ProbMeasure(mass / total);
  }

  static ProbMeasure uniform(Index n) {
    return ProbMeasure(Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
  }

  static ProbMeasure point_mass(Index n, Index at) {
    Vector<Scalar> w = Vector<Scalar>::Zero(n);
    w(at) = Scalar(1);
    return ProbMeasure(w);
  }

  Index size() const { return weights_.size(); }
  Scalar operator()(Index x) const { return weights_(x); }
  const Vector<Scalar>& weights() const { return weights_; }

  bool in_support(Index x) const { return weights_(x) > Scalar(0); }

  std::vector<Index> support() const {
    std::vector<Index> s;
    for (Index x = 0; x < size(); ++x)
      if (in_support(x)) s.push_back(x);
    return s;
  }

  bool has_full_support() const { return (weights_.array() > Scalar(0)).all(); }

  bool operator==(const ProbMeasure& other) const {
    return size() == other.size() && weights_ == other.weights_;
  }

 private:
  static Vector<Scalar> from_list(std::initializer_list<Scalar> weights) {
    Vector<Scalar> v(static_cast<Index>(weights.size()));
    Index i = 0;
    for (Scalar w : weights) v(i++) = w;
    return v;
  }

  Vector<Scalar> weights_;
};

template <typename Scalar>
void require_same_size(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& q) {
  require(p.size() == q.size(), ErrorCode::DimensionMismatch,
          "measures live on alphabets of different size");
}

/// Supp(P) is contained in Supp(Q).
template <typename Scalar>
bool absolutely_continuous(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& q) {
  require_same_size(p, q);
  for (Index x = 0; x < p.size(); ++x)
    if (p.in_support(x) && !q.in_support(x)) return false;
  return true;
}

/// Supports are disjoint.
template <typename Scalar>
bool singular(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& q) {
  require_same_size(p, q);
  for (Index x = 0; x < p.size(); ++x)
    if (p.in_support(x) && q.in_support(x)) return false;
  return true;
}

template <typename Scalar>
Scalar total_variation(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& q) {
  require_same_size(p, q);
  return Scalar(0.5) * (p.weights() - q.weights()).cwiseAbs().sum();
}

/// sum_x (sqrt P(x) - sqrt Q(x))^2 = 2 - 2 sum_x sqrt(P(x) Q(x)).
template <typename Scalar>
Scalar squared_hellinger(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& q) {
  require_same_size(p, q);
  return (p.weights().cwiseSqrt() - q.weights().cwiseSqrt()).squaredNorm();
}

/// log sum_x P(x)^e, computed in the log domain so that large exponents do not
/// underflow small weights. Zero weights follow the conventions of log_pow.
template <typename Scalar>
Scalar log_power_sum(const Vector<Scalar>& weights, Scalar exponent) {
  Vector<Scalar> terms(weights.size());
  for (Index x = 0; x < weights.size(); ++x) terms(x) = detail::log_pow(weights(x), exponent);
  return detail::log_sum_exp(terms);
}

/// P'(x) = P(x)^alpha / sum_y P(y)^alpha.
template <typename Scalar>
ProbMeasure<Scalar> escort(const ProbMeasure<Scalar>& p, Alpha<Scalar> alpha) {
  using std::exp;
  const Scalar a = alpha.value();
  const Scalar log_total = log_power_sum(p.weights(), a);
  Vector<Scalar> w(p.size());
  for (Index x = 0; x < p.size(); ++x)
    w(x) = p.in_support(x) ? exp(detail::log_pow(p(x), a) - log_total) : Scalar(0);
  return ProbMeasure<Scalar>::normalized(w);
}

/// ||P|| = (sum_x P(x)^alpha)^(1/alpha).
template <typename Scalar>
Scalar alpha_norm(const Vector<Scalar>& weights, Alpha<Scalar> alpha) {
  using std::exp;
  if (alpha.is_one()) return weights.sum();
  return exp(log_power_sum(weights, alpha.value()) / alpha.value());
}

template <typename Scalar>
Scalar alpha_norm(const ProbMeasure<Scalar>& p, Alpha<Scalar> alpha) {
  if (alpha.is_one()) return Scalar(1);
  return alpha_norm(p.weights(), alpha);
}

/// ln_alpha(u) = (u^(1-alpha) - 1) / (1 - alpha), natural log at alpha = 1.
/// u = 0 gives the limit of the formula (finite for alpha < 1); u = +inf is
/// accepted as well.
template <typename Scalar>
Scalar ln_alpha(Scalar u, Alpha<Scalar> alpha) {
  using std::isnan;
  using std::log;
  using std::pow;
  require(!isnan(u) && u >= Scalar(0), ErrorCode::DomainError, "ln_alpha needs u >= 0");
  const Scalar a = alpha.value();
  if (alpha.is_one()) return u == Scalar(0) ? -detail::infinity<Scalar>() : log(u);
  if (u == Scalar(0)) return a < Scalar(1) ? Scalar(-1) / (Scalar(1) - a) : -detail::infinity<Scalar>();
  if (u == detail::infinity<Scalar>())
    return a < Scalar(1) ? detail::infinity<Scalar>() : Scalar(1) / (a - Scalar(1));
  return (pow(u, Scalar(1) - a) - Scalar(1)) / (Scalar(1) - a);
}

/// e_alpha(u) = max(1 + (1 - alpha) u, 0)^(1/(1-alpha)), exp at alpha = 1.
template <typename Scalar>
Scalar e_alpha(Scalar u, Alpha<Scalar> alpha) {
  using std::exp;
  using std::max;
  using std::pow;
  if (alpha.is_one()) return exp(u);
  const Scalar a = alpha.value();
  const Scalar base = max(Scalar(1) + (Scalar(1) - a) * u, Scalar(0));
  return pow(base, Scalar(1) / (Scalar(1) - a));
}

/// Normalized P^t Q^(1-t). The endpoints return the inputs unchanged.
template <typename Scalar>
ProbMeasure<Scalar> geometric_mixture(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& q,
                                      Scalar t) {
  using std::exp;
  using std::log;
  require(t >= Scalar(0) && t <= Scalar(1), ErrorCode::InvalidArgument, "t must lie in [0,1]");
  require(!singular(p, q), ErrorCode::SingularPair, "geometric mixture of singular measures");
  if (t == Scalar(1)) return p;
  if (t == Scalar(0)) return q;
  Vector<Scalar> logw(p.size());
  for (Index x = 0; x < p.size(); ++x) {
    logw(x) = (p.in_support(x) && q.in_support(x)) ? t * log(p(x)) + (Scalar(1) - t) * log(q(x))
                                                   : -detail::infinity<Scalar>();
  }
  const Scalar top = logw.maxCoeff();
  Vector<Scalar> w(p.size());
  for (Index x = 0; x < p.size(); ++x) w(x) = exp(logw(x) - top);
  return ProbMeasure<Scalar>::normalized(w);
}

/// Normalized [t P^(alpha-1) + (1-t) Q^(alpha-1)]^(1/(alpha-1)); reduces to the
/// geometric mixture at alpha = 1.
template <typename Scalar>
ProbMeasure<Scalar> ln_alpha_mixture(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& q,
                                     Scalar t, Alpha<Scalar> alpha) {
  using std::exp;
  using std::log;
  if (alpha.is_one()) return geometric_mixture(p, q, t);
  require(t >= Scalar(0) && t <= Scalar(1), ErrorCode::InvalidArgument, "t must lie in [0,1]");
  require_same_size(p, q);
  if (!alpha.above_one())
    require(!singular(p, q), ErrorCode::SingularPair, "ln_alpha mixture of singular measures");
  if (t == Scalar(1)) return p;
  if (t == Scalar(0)) return q;

  const Scalar e = alpha.value() - Scalar(1);
  Vector<Scalar> logw(p.size());
  Vector<Scalar> pair(2);
  for (Index x = 0; x < p.size(); ++x) {
    pair(0) = log(t) + detail::log_pow(p(x), e);
    pair(1) = log(Scalar(1) - t) + detail::log_pow(q(x), e);
    // log of the bracket; +inf (alpha < 1, a zero weight) maps to zero mass.
    const Scalar log_bracket = detail::log_sum_exp(pair);
    logw(x) = log_bracket / e;
  }
  const Scalar top = logw.maxCoeff();
  Vector<Scalar> w(p.size());
  for (Index x = 0; x < p.size(); ++x) w(x) = exp(logw(x) - top);
  return ProbMeasure<Scalar>::normalized(w);
}

}  // namespace alphaproj

#endif  // ALPHAPROJ_MEASURES_HPP
