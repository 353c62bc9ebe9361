#ifndef ALPHAPROJ_FAMILIES_HPP
#define ALPHAPROJ_FAMILIES_HPP

// Linear families {P : sum_x P(x) f_i(x) = 0} and alpha-power-law families
//
//   P_theta(x)^(alpha-1) = Z(theta)^(1-alpha) [R(x)^(alpha-1) + (1-alpha) sum_i theta_i f_i(x)],
//
// their clipped extension for alpha > 1, the tilted linear family that makes
// a target measure a member, and the change of reference measure.

#include <cmath>
#include <vector>

#include "alphaproj/measures.hpp"

namespace alphaproj {

inline constexpr double kMembershipTolerance = 1e-9;
inline constexpr double kRankThreshold = 1e-10;

/// Indices of a maximal linearly independent subset of the rows of `f`,
/// found by column-pivoted QR of f^T, returned in increasing order.
template <typename Scalar>
std::vector<Index> independent_rows(const Matrix<Scalar>& f, Scalar threshold = Scalar(kRankThreshold)) {
  std::vector<Index> rows;
  if (f.rows() == 0 || f.cols() == 0) return rows;
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(f.transpose());
  qr.setThreshold(threshold);
  const Index rank = qr.rank();
  for (Index i = 0; i < rank; ++i) rows.push_back(qr.colsPermutation().indices()(i));
  std::sort(rows.begin(), rows.end());
  return rows;
}

template <typename Scalar>
Matrix<Scalar> select_rows(const Matrix<Scalar>& f, const std::vector<Index>& rows) {
  Matrix<Scalar> out(static_cast<Index>(rows.size()), f.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = f.row(rows[i]);
  return out;
}

template <typename Scalar>
class LinearFamily {
 public:
  /// Row i of `f` holds f_i evaluated on the alphabet. Linearly dependent rows
  /// are dropped; kept_rows() maps the reduced rows back to the input.
  explicit LinearFamily(Matrix<Scalar> f, Scalar tolerance = Scalar(kMembershipTolerance))
      : original_(std::move(f)), tolerance_(tolerance) {
    using std::isfinite;
    require(original_.cols() >= 2, ErrorCode::InvalidArgument, "alphabet needs two symbols");
    for (Index i = 0; i < original_.rows(); ++i)
      for (Index x = 0; x < original_.cols(); ++x)
        require(isfinite(original_(i, x)), ErrorCode::InvalidArgument, "non-finite constraint");
    kept_ = independent_rows(original_);
    reduced_ = select_rows(original_, kept_);
  }

  static LinearFamily unconstrained(Index n) { return LinearFamily(Matrix<Scalar>(0, n)); }

  Index alphabet_size() const { return original_.cols(); }
  Index rank() const { return reduced_.rows(); }
  Index original_rows() const { return original_.rows(); }
  Scalar tolerance() const { return tolerance_; }

  const Matrix<Scalar>& constraints() const { return reduced_; }
  const Matrix<Scalar>& original_constraints() const { return original_; }
  const std::vector<Index>& kept_rows() const { return kept_; }

  /// max_i |sum_x P(x) f_i(x)| over the constraints as given.
  Scalar violation(const ProbMeasure<Scalar>& p) const {
    require(p.size() == alphabet_size(), ErrorCode::DimensionMismatch,
            "measure and family live on different alphabets");
    if (original_.rows() == 0) return Scalar(0);
    return (original_ * p.weights()).cwiseAbs().maxCoeff();
  }

  bool contains(const ProbMeasure<Scalar>& p) const { return violation(p) <= tolerance_; }

 private:
  Matrix<Scalar> original_;
  Matrix<Scalar> reduced_;
  std::vector<Index> kept_;
  Scalar tolerance_;
};

template <typename Scalar>
bool linear_membership(const LinearFamily<Scalar>& family, const ProbMeasure<Scalar>& p) {
  return family.contains(p);
}

template <typename Scalar>
class PowerLawFamily {
 public:
  /// alpha = 1 gives the exponential family P_theta ∝ R exp(-theta . f).
  /// For alpha > 1 the reference measure must have full support.
  PowerLawFamily(Alpha<Scalar> alpha, ProbMeasure<Scalar> reference, Matrix<Scalar> f)
      : alpha_(alpha), reference_(std::move(reference)), f_(std::move(f)) {
    require(f_.cols() == reference_.size(), ErrorCode::DimensionMismatch,
            "constraint functions and reference measure disagree on alphabet size");
    if (alpha_.above_one())
      require(reference_.has_full_support(), ErrorCode::InvalidArgument,
              "alpha > 1 requires a reference measure with full support");
  }

  Alpha<Scalar> alpha() const { return alpha_; }
  const ProbMeasure<Scalar>& reference() const { return reference_; }
  const Matrix<Scalar>& constraints() const { return f_; }
  Index dimension() const { return f_.rows(); }
  Index alphabet_size() const { return f_.cols(); }

  /// R(x)^(alpha-1); +inf where R(x) = 0 and alpha < 1.
  Vector<Scalar> reference_power() const {
    using std::exp;
    Vector<Scalar> out(alphabet_size());
    for (Index x = 0; x < alphabet_size(); ++x)
      out(x) = exp(detail::log_pow(reference_(x), alpha_.value() - Scalar(1)));
    return out;
  }

  /// R^(alpha-1) + (1-alpha) F^T theta. Undefined for alpha = 1.
  Vector<Scalar> affine_term(const Vector<Scalar>& theta) const {
    check_theta(theta);
    require(!alpha_.is_one(), ErrorCode::InvalidArgument, "no affine term at alpha = 1");
    Vector<Scalar> a = reference_power();
    const Vector<Scalar> shift = (Scalar(1) - alpha_.value()) * (f_.transpose() * theta);
    for (Index x = 0; x < alphabet_size(); ++x)
      if (a(x) != detail::infinity<Scalar>()) a(x) += shift(x);
    return a;
  }

  bool admissible(const Vector<Scalar>& theta) const {
    if (alpha_.is_one()) return true;
    const Vector<Scalar> a = affine_term(theta);
    for (Index x = 0; x < alphabet_size(); ++x)
      if (!(a(x) > Scalar(0))) return false;
    return true;
  }

  /// log Z(theta), the normalizer of the (unclipped) member.
  Scalar log_normalizer(const Vector<Scalar>& theta) const {
    return detail::log_sum_exp(log_mass(theta, false));
  }

  ProbMeasure<Scalar> member(const Vector<Scalar>& theta) const {
    if (!admissible(theta)) throw Error(ErrorCode::InadmissibleTheta, "theta violates positivity");
    return from_log_mass(log_mass(theta, false));
  }

  /// The [.]_+ form used by the extended family (alpha > 1). For alpha <= 1
  /// this is member(theta).
  ProbMeasure<Scalar> clipped_member(const Vector<Scalar>& theta) const {
    if (!alpha_.above_one()) return member(theta);
    const Vector<Scalar> lm = log_mass(theta, true);
    if (detail::log_sum_exp(lm) == -detail::infinity<Scalar>())
      throw Error(ErrorCode::InadmissibleTheta, "every coordinate is clipped");
    return from_log_mass(lm);
  }

  Scalar clipped_log_normalizer(const Vector<Scalar>& theta) const {
    return detail::log_sum_exp(log_mass(theta, alpha_.above_one()));
  }

 private:
  void check_theta(const Vector<Scalar>& theta) const {
    require(theta.size() == dimension(), ErrorCode::DimensionMismatch,
            "theta has the wrong dimension");
  }

  // log of the unnormalized mass a(x)^(1/(alpha-1)) (or R e^{-theta.f} at alpha = 1).
  Vector<Scalar> log_mass(const Vector<Scalar>& theta, bool clip) const {
    using std::log;
    check_theta(theta);
    Vector<Scalar> out(alphabet_size());
    if (alpha_.is_one()) {
      const Vector<Scalar> lin = f_.transpose() * theta;
      for (Index x = 0; x < alphabet_size(); ++x)
        out(x) = reference_.in_support(x) ? log(reference_(x)) - lin(x) : -detail::infinity<Scalar>();
      return out;
    }
    const Scalar beta = Scalar(1) / (alpha_.value() - Scalar(1));
    const Vector<Scalar> a = affine_term(theta);
    for (Index x = 0; x < alphabet_size(); ++x) {
      if (a(x) == detail::infinity<Scalar>()) {
        out(x) = -detail::infinity<Scalar>();  // alpha < 1 and R(x) = 0
      } else if (a(x) > Scalar(0)) {
        out(x) = beta * log(a(x));
      } else {
        require(clip, ErrorCode::InadmissibleTheta, "theta violates positivity");
        out(x) = -detail::infinity<Scalar>();
      }
    }
    return out;
  }

  static ProbMeasure<Scalar> from_log_mass(const Vector<Scalar>& lm) {
    using std::exp;
    const Scalar log_z = detail::log_sum_exp(lm);
    Vector<Scalar> w(lm.size());
    for (Index x = 0; x < lm.size(); ++x) w(x) = exp(lm(x) - log_z);
    return ProbMeasure<Scalar>::normalized(w);
  }

  Alpha<Scalar> alpha_;
  ProbMeasure<Scalar> reference_;
  Matrix<Scalar> f_;
};

template <typename Scalar>
ProbMeasure<Scalar> power_law_member(const PowerLawFamily<Scalar>& family, const Vector<Scalar>& theta) {
  return family.member(theta);
}

/// Least-squares certificate that Q has the power-law form for some theta:
/// R^(alpha-1) + (1-alpha) F^T theta = scale * Q^(alpha-1) (scale = Z^(alpha-1)).
/// With alpha > 1 a zero of Q is fitted as a zero of the affine term, i.e. a
/// boundary point of the parameter set. At alpha = 1 the fit is done on logs.
template <typename Scalar>
struct MemberFit {
  Vector<Scalar> theta;
  Scalar scale{0};
  Scalar residual{0};
  bool ok{false};
};

template <typename Scalar>
MemberFit<Scalar> fit_member(const PowerLawFamily<Scalar>& family, const ProbMeasure<Scalar>& q,
                             Scalar tolerance = Scalar(1e-8)) {
  using std::abs;
  using std::exp;
  using std::log;
  using std::max;
  using std::pow;
  require(q.size() == family.alphabet_size(), ErrorCode::DimensionMismatch, "size mismatch");
  const Index n = family.alphabet_size();
  const Index k = family.dimension();
  const Scalar a = family.alpha().value();
  const ProbMeasure<Scalar>& r = family.reference();
  MemberFit<Scalar> fit;
  fit.theta = Vector<Scalar>::Zero(k);

  std::vector<Index> rows;
  for (Index x = 0; x < n; ++x) {
    if (!r.in_support(x)) {
      if (q.in_support(x)) return fit;  // members vanish where R does
      continue;
    }
    if (!q.in_support(x) && !family.alpha().above_one()) return fit;
    rows.push_back(x);
  }

  Matrix<Scalar> lhs(static_cast<Index>(rows.size()), k + 1);
  Vector<Scalar> rhs(static_cast<Index>(rows.size()));
  const Matrix<Scalar>& f = family.constraints();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index x = rows[i];
    const auto row = static_cast<Index>(i);
    if (family.alpha().is_one()) {
      // log Q = log R - theta.f - log Z
      lhs.row(row).head(k) = f.col(x).transpose();
      lhs(row, k) = Scalar(1);
      rhs(row) = log(r(x)) - log(q(x));
    } else {
      lhs.row(row).head(k) = (Scalar(1) - a) * f.col(x).transpose();
      lhs(row, k) = q.in_support(x) ? -pow(q(x), a - Scalar(1)) : Scalar(0);
      rhs(row) = -pow(r(x), a - Scalar(1));
    }
  }
  const Vector<Scalar> sol = lhs.completeOrthogonalDecomposition().solve(rhs);
  fit.theta = sol.head(k);
  const Scalar scale_ref = max(Scalar(1), rhs.cwiseAbs().maxCoeff());
  fit.residual = rows.empty() ? Scalar(0) : (lhs * sol - rhs).cwiseAbs().maxCoeff() / scale_ref;
  if (family.alpha().is_one()) {
    fit.scale = exp(sol(k));  // Z
    fit.ok = fit.residual <= tolerance;
  } else {
    fit.scale = sol(k);
    fit.ok = fit.residual <= tolerance && fit.scale > Scalar(0);
  }
  return fit;
}

/// Enlargement of M^(alpha) for alpha > 1 by the clipped form plus support
/// and sign conditions relative to theta_star, the dual parameter of the
/// forward projection of R on the associated linear family.
template <typename Scalar>
class ExtendedPowerLawFamily {
 public:
  ExtendedPowerLawFamily(PowerLawFamily<Scalar> base, Vector<Scalar> theta_star)
      : base_(std::move(base)), theta_star_(std::move(theta_star)) {
    require(base_.alpha().above_one(), ErrorCode::InvalidArgument,
            "the extended family is defined for alpha > 1");
    require(theta_star_.size() == base_.dimension(), ErrorCode::DimensionMismatch,
            "theta_star has the wrong dimension");
  }

  const PowerLawFamily<Scalar>& base() const { return base_; }
  const Vector<Scalar>& theta_star() const { return theta_star_; }
  ProbMeasure<Scalar> anchor() const { return base_.clipped_member(theta_star_); }

 private:
  PowerLawFamily<Scalar> base_;
  Vector<Scalar> theta_star_;
};

/// Checks the three defining conditions: P is the clipped member at theta,
/// Supp(P_theta*) is inside Supp(P), and theta.f <= theta*.f off Supp(P).
template <typename Scalar>
bool extended_member_check(const ExtendedPowerLawFamily<Scalar>& ext, const ProbMeasure<Scalar>& p,
                           const Vector<Scalar>& theta, Scalar tolerance = Scalar(kMembershipTolerance)) {
  const PowerLawFamily<Scalar>& base = ext.base();
  require(p.size() == base.alphabet_size(), ErrorCode::DimensionMismatch, "size mismatch");
  if (theta.size() != base.dimension()) return false;
  ProbMeasure<Scalar> generated = p;
  try {
    generated = base.clipped_member(theta);
  } catch (const Error&) {
    return false;
  }
  if ((generated.weights() - p.weights()).cwiseAbs().maxCoeff() > tolerance) return false;

  const ProbMeasure<Scalar> anchor = ext.anchor();
  const Vector<Scalar> lin = base.constraints().transpose() * theta;
  const Vector<Scalar> lin_star = base.constraints().transpose() * ext.theta_star();
  for (Index x = 0; x < p.size(); ++x) {
    const bool in_p = p(x) > tolerance;
    if (anchor(x) > tolerance && !in_p) return false;
    if (!in_p && lin(x) > lin_star(x) + tolerance) return false;
  }
  return true;
}

/// tau_i = sum P^ f_i / sum P^ R^(alpha-1).
template <typename Scalar>
Vector<Scalar> tilt_coefficients(const PowerLawFamily<Scalar>& family, const ProbMeasure<Scalar>& p_hat) {
  using std::isfinite;
  require(p_hat.size() == family.alphabet_size(), ErrorCode::DimensionMismatch, "size mismatch");
  require(family.reference().has_full_support(), ErrorCode::InvalidArgument,
          "the tilted family needs a reference measure with full support");
  const Vector<Scalar> rp = family.reference_power();
  const Scalar denominator = p_hat.weights().dot(rp);
  if (!(isfinite(denominator) && denominator > Scalar(0)))
    throw Error(ErrorCode::DegenerateDenominator, "sum P^ R^(alpha-1) vanishes");
  return (family.constraints() * p_hat.weights()) / denominator;
}

/// F~ with rows f_i - tau_i R^(alpha-1).
template <typename Scalar>
Matrix<Scalar> tilted_constraints(const PowerLawFamily<Scalar>& family, const ProbMeasure<Scalar>& p_hat) {
  const Vector<Scalar> tau = tilt_coefficients(family, p_hat);
  return family.constraints() - tau * family.reference_power().transpose();
}

/// The linear family orthogonal to M^(alpha)(R, f) that contains P^.
template <typename Scalar>
LinearFamily<Scalar> orthogonal_linear_family(const PowerLawFamily<Scalar>& family,
                                              const ProbMeasure<Scalar>& p_hat) {
  return LinearFamily<Scalar>(tilted_constraints(family, p_hat));
}

/// Makes P_theta* the reference measure. A member at theta is the member of
/// the new family at xi = (theta - theta*) / Z(theta*)^(alpha-1).
template <typename Scalar>
PowerLawFamily<Scalar> reparametrize(const PowerLawFamily<Scalar>& family, const Vector<Scalar>& theta_star) {
  return PowerLawFamily<Scalar>(family.alpha(), family.member(theta_star), family.constraints());
}

template <typename Scalar>
Vector<Scalar> reparametrized_theta(const PowerLawFamily<Scalar>& family, const Vector<Scalar>& theta_star,
                                    const Vector<Scalar>& theta) {
  using std::exp;
  const Scalar scale = exp((family.alpha().value() - Scalar(1)) * family.log_normalizer(theta_star));
  return (theta - theta_star) / scale;
}

/// Binomial(L, theta) on {0, ..., L}, theta in (0, 1).
template <typename Scalar>
ProbMeasure<Scalar> binomial_member(Index trials, Scalar theta) {
  using std::exp;
  using std::lgamma;
  using std::log;
  require(trials >= 1, ErrorCode::InvalidArgument, "binomial needs at least one trial");
  if (!(theta > Scalar(0) && theta < Scalar(1)))
    throw Error(ErrorCode::InadmissibleTheta, "binomial parameter must lie in (0,1)");
  Vector<Scalar> w(trials + 1);
  for (Index x = 0; x <= trials; ++x) {
    const Scalar log_choose = lgamma(Scalar(trials + 1)) - lgamma(Scalar(x + 1)) - lgamma(Scalar(trials - x + 1));
    w(x) = exp(log_choose + Scalar(x) * log(theta) + Scalar(trials - x) * log(Scalar(1) - theta));
  }
  return ProbMeasure<Scalar>::normalized(w);
}

}  // namespace alphaproj

#endif  // ALPHAPROJ_FAMILIES_HPP
