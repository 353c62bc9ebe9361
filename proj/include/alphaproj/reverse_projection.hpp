#ifndef ALPHAPROJ_REVERSE_PROJECTION_HPP
#define ALPHAPROJ_REVERSE_PROJECTION_HPP

// Reverse projection Q = argmin_{P in M} I_alpha(P^, P) onto a power-law
// family M = M(R, f), computed as the forward projection of R onto the
// tilted linear family that passes through P^; classification of the answer
// against M, its closure and the clipped extension; direct 1-D scans;
// descent on log-convex hulls; and the mean-power-likelihood estimator.

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "alphaproj/divergence.hpp"
#include "alphaproj/families.hpp"
#include "alphaproj/forward_projection.hpp"
#include "alphaproj/measures.hpp"

namespace alphaproj {

enum class ReverseCase { InFamily, InClosureOnly, RequiresExtension };

inline std::string_view to_string(ReverseCase c) {
  switch (c) {
    case ReverseCase::InFamily: return "InFamily";
    case ReverseCase::InClosureOnly: return "InClosureOnly";
    case ReverseCase::RequiresExtension: return "RequiresExtension";
  }
  return "Unknown";
}

enum class WitnessKind { None, MixtureSequence, BoundaryPoint, DirectionAtInfinity };

inline std::string_view to_string(WitnessKind k) {
  switch (k) {
    case WitnessKind::None: return "None";
    case WitnessKind::MixtureSequence: return "MixtureSequence";
    case WitnessKind::BoundaryPoint: return "BoundaryPoint";
    case WitnessKind::DirectionAtInfinity: return "DirectionAtInfinity";
  }
  return "Unknown";
}

/// Members P_n of M with P_n -> Q, evidence that Q lies in the closure.
/// For a boundary point theta_n = (1 - 1/n) theta; for a direction at
/// infinity theta_n = n d; the mixture sequence projects R onto linear
/// families through (1 - 1/n) Q + R / n.
template <typename Scalar>
struct ClosureWitness {
  WitnessKind kind{WitnessKind::None};
  Vector<Scalar> anchor;            // theta-bar or d
  std::vector<Scalar> n_values;
  std::vector<Scalar> distances;    // total variation between P_n and Q
  Scalar log_log_slope{0};
  bool converges{false};
};

template <typename Scalar>
struct ReverseOutcome {
  ReverseCase kind;
  ProbMeasure<Scalar> q;
  Vector<Scalar> theta;           // base-family parameter; see theta_is_limit
  bool theta_is_limit;            // theta is the last element of the witness sequence
  DivergenceValue<Scalar> divergence;  // I_alpha(P^, Q)
  LinearFamily<Scalar> l_tilde;
  ProjectionResult<Scalar> projection;  // of R onto l_tilde
  ClosureWitness<Scalar> witness;
  bool extended_member;           // extended_member_check(Q) for RequiresExtension
};

namespace detail {

inline constexpr double kClassifyTolerance = 1e-9;

// theta~ of the tilted family expressed in the base family: the affine terms
// agree up to the positive factor c = 1 - (1 - alpha) tau . theta~.
template <typename Scalar>
std::pair<Vector<Scalar>, Scalar> untilt(const Vector<Scalar>& theta_tilde, const Vector<Scalar>& tau, Scalar alpha) {
  if (alpha == Scalar(1)) return {theta_tilde, Scalar(1)};
  const Scalar c = Scalar(1) - (Scalar(1) - alpha) * tau.dot(theta_tilde);
  return {theta_tilde / c, c};
}

template <typename Scalar>
Scalar log_log_slope(const std::vector<Scalar>& n, const std::vector<Scalar>& d) {
  using std::log;
  Scalar sx(0), sy(0), sxx(0), sxy(0);
  int m = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(d[i] > Scalar(0))) continue;
    const Scalar x = log(n[i]);
    const Scalar y = log(d[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return -detail::infinity<Scalar>();
  return (Scalar(m) * sxy - sx * sy) / (Scalar(m) * sxx - sx * sx);
}

template <typename Scalar>
void finish_witness(ClosureWitness<Scalar>& w) {
  w.log_log_slope = log_log_slope(w.n_values, w.distances);
  bool decreasing = !w.distances.empty();
  for (std::size_t i = 1; i < w.distances.size(); ++i)
    decreasing = decreasing && w.distances[i] <= w.distances[i - 1] * (Scalar(1) + Scalar(1e-9));
  // Distances that drop to rounding level count as converged whatever the slope.
  const bool tiny = !w.distances.empty() && w.distances.back() < Scalar(1e-12);
  w.converges = decreasing && (tiny || w.log_log_slope <= Scalar(-0.5));
}

inline const std::vector<double>& witness_schedule() {
  static const std::vector<double> n{1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  return n;
}

}  // namespace detail

/// Reverse projection of P^ on M(R, f). R must have full support.
template <typename Scalar>
ReverseOutcome<Scalar> reverse_project(const PowerLawFamily<Scalar>& family, const ProbMeasure<Scalar>& p_hat,
                                       const SolverOptions& opts = {}) {
  using std::max;
  const Alpha<Scalar> alpha = family.alpha();
  const Scalar a = alpha.value();
  const ProbMeasure<Scalar>& r = family.reference();
  require(r.has_full_support(), ErrorCode::InvalidArgument, "reverse projection needs a full-support reference");
  const Vector<Scalar> tau = tilt_coefficients(family, p_hat);
  const Matrix<Scalar> f_tilde = tilted_constraints(family, p_hat);
  LinearFamily<Scalar> l_tilde(f_tilde);
  ProjectionResult<Scalar> proj = forward_project(l_tilde, r, alpha, opts);
  if (proj.status != SolverStatus::Converged)
    throw Error(ErrorCode::NotConverged, "forward projection onto the tilted family did not converge");
  const ProbMeasure<Scalar> q = proj.q;
  const auto [theta_base, c] = detail::untilt(proj.theta_star, tau, a);

  ClosureWitness<Scalar> witness;
  ReverseCase kind = ReverseCase::InClosureOnly;
  Vector<Scalar> theta = theta_base;
  bool theta_is_limit = false;
  bool extended = false;

  auto member_distance = [&](const Vector<Scalar>& t) {
    return total_variation(family.member(t), q);
  };

  const bool full = q.has_full_support();
  if (full && c > Scalar(0) && family.admissible(theta_base) &&
      member_distance(theta_base) <= Scalar(detail::kClassifyTolerance)) {
    kind = ReverseCase::InFamily;
  } else if (!alpha.above_one()) {
    // Members Q_n of M from projecting R onto families through (1-1/n) Q + R/n.
    witness.kind = WitnessKind::MixtureSequence;
    const Vector<Scalar> rp = family.reference_power();
    for (double n : detail::witness_schedule()) {
      const Scalar inv(1.0 / n);
      const ProbMeasure<Scalar> mix((Scalar(1) - inv) * q.weights() + inv * r.weights());
      const PowerLawFamily<Scalar> tilted_family(alpha, r, f_tilde);
      const Vector<Scalar> tau_n = tilt_coefficients(tilted_family, mix);
      const LinearFamily<Scalar> l_n(f_tilde - tau_n * rp.transpose());
      const auto proj_n = forward_project(l_n, r, alpha, opts);
      // theta in the base family: undo both tilts.
      const auto [theta_mid, c_n] = detail::untilt(proj_n.theta_star, tau_n, a);
      const auto [theta_n, c_base] = detail::untilt(theta_mid, tau, a);
      witness.n_values.push_back(Scalar(n));
      witness.distances.push_back(total_variation(proj_n.q, q));
      if (c_n > Scalar(0) && c_base > Scalar(0)) theta = theta_n;
    }
    detail::finish_witness(witness);
    theta_is_limit = true;
  } else {
    const MemberFit<Scalar> boundary = fit_member(family, q);
    if (boundary.ok) {
      witness.kind = WitnessKind::BoundaryPoint;
      witness.anchor = boundary.theta;
      for (double n : detail::witness_schedule()) {
        const Vector<Scalar> t = (Scalar(1) - Scalar(1.0 / n)) * boundary.theta;
        witness.n_values.push_back(Scalar(n));
        witness.distances.push_back(family.admissible(t) ? member_distance(t) : detail::infinity<Scalar>());
        theta = t;
      }
      detail::finish_witness(witness);
    }
    if (!witness.converges) {
      // Direction d with (1 - alpha) F^T d = Q^(alpha-1): P_{n d} -> Q.
      const Matrix<Scalar>& f = family.constraints();
      Vector<Scalar> qp(q.size());
      for (Index x = 0; x < q.size(); ++x) qp(x) = q.in_support(x) ? std::pow(q(x), a - Scalar(1)) : Scalar(0);
      const Matrix<Scalar> design = (Scalar(1) - a) * f.transpose();
      const Vector<Scalar> d = design.completeOrthogonalDecomposition().solve(qp);
      const Scalar residual = (design * d - qp).cwiseAbs().maxCoeff() / max(Scalar(1), qp.cwiseAbs().maxCoeff());
      if (residual <= Scalar(1e-8) && f.rows() > 0) {
        ClosureWitness<Scalar> far;
        far.kind = WitnessKind::DirectionAtInfinity;
        far.anchor = d;
        for (double n : detail::witness_schedule()) {
          const Vector<Scalar> t = Scalar(n) * d;
          far.n_values.push_back(Scalar(n));
          far.distances.push_back(family.admissible(t) ? member_distance(t) : detail::infinity<Scalar>());
        }
        detail::finish_witness(far);
        if (far.converges) {
          witness = far;
          theta = Scalar(detail::witness_schedule().back()) * d;
        }
      }
    }
    if (witness.converges) {
      theta_is_limit = true;
    } else {
      kind = ReverseCase::RequiresExtension;
      const PowerLawFamily<Scalar> tilted_family(alpha, r, f_tilde);
      const ExtendedPowerLawFamily<Scalar> ext(tilted_family, proj.theta_star);
      extended = extended_member_check(ext, q, proj.theta_star, Scalar(1e-8));
      theta = proj.theta_star;  // parameter of the tilted family
    }
  }

  const auto div = relative_alpha_entropy(p_hat, q, alpha);
  return ReverseOutcome<Scalar>{kind, q, theta, theta_is_limit, div, std::move(l_tilde), std::move(proj),
                                std::move(witness), extended};
}

/// One point of a parameter scan.
struct ScanPoint {
  double theta;
  double value;
};

struct ScanResult {
  std::vector<ScanPoint> series;
  std::vector<ScanPoint> local_minima;   // refined
  std::vector<ScanPoint> global_minima;  // local minima within 1e-9 of the best
};

using ScalarMember = std::function<ProbMeasure<double>(double)>;

/// theta -> I_alpha(P^, P_theta) on lo, lo + step, ..., hi. Every grid-local
/// minimum is refined on its neighbouring cells by Brent's method
/// (safeguarded parabolic interpolation). Inadmissible theta evaluate to +inf.
inline ScanResult parametric_reverse_scan(const ScalarMember& member, const ProbMeasure<double>& p_hat,
                                          Alpha<double> alpha, double lo, double hi, double step) {
  require(hi > lo && step > 0.0, ErrorCode::InvalidArgument, "invalid scan grid");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 100'000'000) throw Error(ErrorCode::TooLarge, "scan grid is too large");
  auto objective = [&](double theta) {
    try {
      const auto d = relative_alpha_entropy(p_hat, member(theta), alpha);
      return d.finite ? d.value : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  ScanResult out;
  out.series.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double theta = lo + step * static_cast<double>(i);
    out.series.push_back({theta, objective(theta)});
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double v = out.series[i].value;
    if (!std::isfinite(v)) continue;
    // Plateaus count once, at their left end.
    const bool left_ok = i == 0 || out.series[i - 1].value > v;
    const bool right_ok = i + 1 == count || out.series[i + 1].value >= v;
    if (!(left_ok && right_ok)) continue;
    const double a = i == 0 ? out.series[i].theta : out.series[i - 1].theta;
    const double b = i + 1 == count ? out.series[i].theta : out.series[i + 1].theta;
    ScanPoint best = out.series[i];
    if (b > a) {
      const auto [x, fx] = boost::math::tools::brent_find_minima(objective, a, b, std::numeric_limits<double>::digits / 2);
      if (fx <= best.value) best = {x, fx};
    }
    out.local_minima.push_back(best);
  }
  double global = std::numeric_limits<double>::infinity();
  for (const auto& m : out.local_minima) global = std::min(global, m.value);
  for (const auto& m : out.local_minima)
    if (m.value <= global + 1e-9) out.global_minima.push_back(m);
  return out;
}

inline ScanResult parametric_reverse_scan(const PowerLawFamily<double>& family, const ProbMeasure<double>& p_hat,
                                          double lo, double hi, double step) {
  require(family.dimension() == 1, ErrorCode::InvalidArgument, "scans are one-dimensional");
  const ScalarMember member = [&family](double t) { return family.member(Vector<double>::Constant(1, t)); };
  return parametric_reverse_scan(member, p_hat, family.alpha(), lo, hi, step);
}

/// Binomial(trials, theta) as a scan family.
inline ScalarMember binomial_family(Index trials) {
  return [trials](double theta) { return binomial_member<double>(trials, theta); };
}

template <typename Scalar>
struct LogConvexResult {
  ProbMeasure<Scalar> q;
  Vector<Scalar> weights;                  // geometric weights over the generators
  Scalar value;                            // I_alpha(R, Q)
  std::vector<Scalar> hellinger_steps;     // squared Hellinger between successive escorts
  Scalar tail_sum;                         // sum of the last three steps
  bool monotone_steps;
  int iterations;
};

struct LogConvexOptions {
  int max_iterations = 500;
  double tail_tolerance = 1e-12;
};

/// Minimizes P -> I_alpha(R, P) over the log-convex hull of `generators`
/// (normalized P ∝ prod_j G_j^(w_j), w in the simplex), alpha < 1. Each pass
/// line-searches the geometric mixture between the iterate and every
/// generator, allowing moves away from a generator while w stays feasible.
/// Stops once the last three passes moved the escort by less than
/// tail_tolerance in squared Hellinger distance.
template <typename Scalar>
LogConvexResult<Scalar> iterative_log_convex_minimize(const std::vector<ProbMeasure<Scalar>>& generators,
                                                      const ProbMeasure<Scalar>& r, Alpha<Scalar> alpha,
                                                      const LogConvexOptions& opts = {}) {
  using std::exp;
  using std::log;
  require(alpha.below_one(), ErrorCode::InvalidArgument, "the descent is guaranteed only for alpha < 1");
  require(!generators.empty(), ErrorCode::InvalidArgument, "no generators");
  const auto m = static_cast<Index>(generators.size());
  const Index n = r.size();
  for (const auto& g : generators) {
    require(g.size() == n, ErrorCode::DimensionMismatch, "generator size mismatch");
    require(absolutely_continuous(g, generators.front()) && absolutely_continuous(generators.front(), g),
            ErrorCode::InvalidArgument, "generators must share one support");
  }
  Matrix<Scalar> logs(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index x = 0; x < n; ++x) {
      const Scalar g = generators[static_cast<std::size_t>(j)](x);
      logs(x, j) = g > Scalar(0) ? log(g) : -detail::infinity<Scalar>();
    }
  auto measure_at = [&](const Vector<Scalar>& w) {
    Vector<Scalar> lw(n);
    for (Index x = 0; x < n; ++x) {
      if (logs(x, 0) == -detail::infinity<Scalar>()) {
        lw(x) = -detail::infinity<Scalar>();
        continue;
      }
      lw(x) = logs.row(x).dot(w);
    }
    const Scalar top = lw.maxCoeff();
    Vector<Scalar> mass(n);
    for (Index x = 0; x < n; ++x) mass(x) = exp(lw(x) - top);
    return ProbMeasure<Scalar>::normalized(mass);
  };
  auto objective = [&](const Vector<Scalar>& w) {
    const auto d = relative_alpha_entropy(r, measure_at(w), alpha);
    return d.finite ? d.value : detail::infinity<Scalar>();
  };

  // Start at the best generator.
  Vector<Scalar> w = Vector<Scalar>::Zero(m);
  Index start = 0;
  Scalar value = detail::infinity<Scalar>();
  for (Index j = 0; j < m; ++j) {
    Vector<Scalar> e = Vector<Scalar>::Zero(m);
    e(j) = Scalar(1);
    const Scalar v = objective(e);
    if (v < value) {
      value = v;
      start = j;
    }
  }
  w(start) = Scalar(1);
  ProbMeasure<Scalar> q = measure_at(w);
  LogConvexResult<Scalar> out{q, w, value, {}, Scalar(0), true, 0};
  if (m == 1) {
    out.q = generators.front();
    return out;
  }

  ProbMeasure<Scalar> escort_prev = escort(q, alpha);
  for (out.iterations = 1; out.iterations <= opts.max_iterations; ++out.iterations) {
    for (Index j = 0; j < m; ++j) {
      // w + t (e_j - w) stays in the simplex for t in [-w_j / (1 - w_j), 1].
      const Scalar wj = w(j);
      const Scalar t_min = wj >= Scalar(1) ? Scalar(0) : -wj / (Scalar(1) - wj);
      Vector<Scalar> dir = -w;
      dir(j) += Scalar(1);
      auto phi = [&](Scalar t) { return static_cast<double>(objective(w + t * dir)); };
      const auto [t, ft] = boost::math::tools::brent_find_minima(phi, static_cast<double>(t_min), 1.0,
                                                                 std::numeric_limits<double>::digits / 2);
      if (Scalar(ft) < value) {
        w += Scalar(t) * dir;
        w = w.cwiseMax(Scalar(0));
        w /= w.sum();
        value = objective(w);
      }
    }
    q = measure_at(w);
    const ProbMeasure<Scalar> escort_now = escort(q, alpha);
    const Scalar s = squared_hellinger(escort_now, escort_prev);
    if (!out.hellinger_steps.empty() && s > out.hellinger_steps.back() + Scalar(1e-14)) out.monotone_steps = false;
    out.hellinger_steps.push_back(s);
    escort_prev = escort_now;
    const std::size_t len = out.hellinger_steps.size();
    Scalar tail(0);
    for (std::size_t i = len >= 3 ? len - 3 : 0; i < len; ++i) tail += out.hellinger_steps[i];
    out.tail_sum = tail;
    if (len >= 3 && tail < Scalar(opts.tail_tolerance)) {
      out.q = q;
      out.weights = w;
      out.value = value;
      return out;
    }
  }
  throw Error(ErrorCode::NotConverged, "log-convex descent hit the iteration limit");
}

/// Observed symbols; P^ = (1/n) sum delta_{x_i}.
class SampleSet {
 public:
  SampleSet(std::vector<Index> observations, Index alphabet_size)
      : observations_(std::move(observations)), alphabet_size_(alphabet_size) {
    require(!observations_.empty(), ErrorCode::InvalidArgument, "no observations");
    require(alphabet_size_ >= 2, ErrorCode::InvalidArgument, "alphabet needs two symbols");
    for (Index x : observations_)
      require(x >= 0 && x < alphabet_size_, ErrorCode::InvalidArgument, "observation outside the alphabet");
  }

  /// One symbol index per line; blank lines are skipped.
  static SampleSet from_csv(std::istream& in, Index alphabet_size) {
    std::vector<Index> obs;
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r,");
      const std::string token = line.substr(first, last - first + 1);
      std::size_t used = 0;
      long long value = 0;
      try {
        value = std::stoll(token, &used);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "sample line is not an integer: " + token);
      }
      if (used != token.size()) throw Error(ErrorCode::InvalidArgument, "sample line is not an integer: " + token);
      obs.push_back(static_cast<Index>(value));
    }
    return SampleSet(std::move(obs), alphabet_size);
  }

  static SampleSet from_csv_file(const std::string& path, Index alphabet_size) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open sample file " + path);
    return from_csv(in, alphabet_size);
  }

  const std::vector<Index>& observations() const { return observations_; }
  Index alphabet_size() const { return alphabet_size_; }
  std::size_t size() const { return observations_.size(); }

  template <typename Scalar = double>
  ProbMeasure<Scalar> empirical() const {
    Vector<Scalar> counts = Vector<Scalar>::Zero(alphabet_size_);
    for (Index x : observations_) counts(x) += Scalar(1);
    return ProbMeasure<Scalar>::normalized(counts);
  }

 private:
  std::vector<Index> observations_;
  Index alphabet_size_;
};

/// (1/c) log sum P^ Q^c - 1/(1+c) log sum Q^(1+c); sum P^ log Q at c = 0.
template <typename Scalar>
Scalar mean_power_likelihood(const ProbMeasure<Scalar>& p_hat, const ProbMeasure<Scalar>& q, Scalar c) {
  using std::log;
  require_same_size(p_hat, q);
  require(c >= Scalar(0), ErrorCode::InvalidArgument, "c must be nonnegative");
  if (c == Scalar(0)) {
    Scalar ll(0);
    for (Index x = 0; x < q.size(); ++x)
      if (p_hat.in_support(x)) ll += p_hat(x) * (q.in_support(x) ? log(q(x)) : -detail::infinity<Scalar>());
    return ll;
  }
  Vector<Scalar> cross(q.size());
  for (Index x = 0; x < q.size(); ++x)
    cross(x) = p_hat.in_support(x) && q.in_support(x) ? log(p_hat(x)) + c * log(q(x)) : -detail::infinity<Scalar>();
  return detail::log_sum_exp(cross) / c - log_power_sum(q.weights(), Scalar(1) + c) / (Scalar(1) + c);
}

template <typename Scalar>
struct MmpleResult {
  ReverseOutcome<Scalar> outcome;
  ProbMeasure<Scalar> empirical;
  Scalar mean_power_likelihood;
};

/// theta-hat_(c+1) = argmin I_(c+1)(P^, P_theta); the family's alpha must be 1 + c.
template <typename Scalar>
MmpleResult<Scalar> mmple_fit(const PowerLawFamily<Scalar>& family, const SampleSet& samples, Scalar c,
                              const SolverOptions& opts = {}) {
  using std::abs;
  require(c > Scalar(0), ErrorCode::InvalidArgument, "c must be positive");
  require(abs(family.alpha().value() - (Scalar(1) + c)) <= Scalar(1e-12), ErrorCode::InvalidArgument,
          "family alpha must equal 1 + c");
  require(samples.alphabet_size() == family.alphabet_size(), ErrorCode::DimensionMismatch,
          "samples and family use different alphabets");
  const ProbMeasure<Scalar> p_hat = samples.template empirical<Scalar>();
  auto outcome = reverse_project(family, p_hat, opts);
  const Scalar mpl = mean_power_likelihood(p_hat, outcome.q, c);
  return {std::move(outcome), p_hat, mpl};
}

enum class ScoreMethod { ClosedForm, FiniteDifference };

/// Score s(x; theta) = grad_theta log P_theta(x), one column per symbol.
/// Closed form: -f(x)/a(x) + sum_y a(y)^(1/(alpha-1) - 1) f(y) / Z, and
/// -f(x) + E_P f at alpha = 1. Finite differences use step 1e-6.
template <typename Scalar>
Matrix<Scalar> score_matrix(const PowerLawFamily<Scalar>& family, const Vector<Scalar>& theta,
                            ScoreMethod method = ScoreMethod::ClosedForm) {
  using std::exp;
  using std::log;
  using std::pow;
  const Index k = family.dimension();
  const Index n = family.alphabet_size();
  const Matrix<Scalar>& f = family.constraints();
  Matrix<Scalar> s(k, n);
  if (method == ScoreMethod::FiniteDifference) {
    const Scalar h(1e-6);
    for (Index i = 0; i < k; ++i) {
      Vector<Scalar> up = theta;
      Vector<Scalar> down = theta;
      up(i) += h;
      down(i) -= h;
      const auto pu = family.member(up);
      const auto pd = family.member(down);
      for (Index x = 0; x < n; ++x)
        s(i, x) = pu.in_support(x) ? (log(pu(x)) - log(pd(x))) / (Scalar(2) * h) : Scalar(0);
    }
    return s;
  }
  const ProbMeasure<Scalar> p = family.member(theta);
  if (family.alpha().is_one()) {
    const Vector<Scalar> mean = f * p.weights();
    for (Index x = 0; x < n; ++x) s.col(x) = -f.col(x) + mean;
    return s;
  }
  const Scalar alpha = family.alpha().value();
  const Vector<Scalar> a = family.affine_term(theta);
  const Scalar log_z = family.log_normalizer(theta);
  Vector<Scalar> weight(n);  // a^(beta - 1) / Z
  for (Index x = 0; x < n; ++x)
    weight(x) = p.in_support(x) ? exp((Scalar(1) / (alpha - Scalar(1)) - Scalar(1)) * log(a(x)) - log_z) : Scalar(0);
  const Vector<Scalar> centre = f * weight;
  for (Index x = 0; x < n; ++x) s.col(x) = p.in_support(x) ? Vector<Scalar>(-f.col(x) / a(x) + centre)
                                                            : Vector<Scalar>(Vector<Scalar>::Zero(k));
  return s;
}

/// sum_y P_theta(y)^(c+1) s(y) / sum_y P_theta(y)^(c+1), the score mean under
/// the measure proportional to P_theta^(c+1).
template <typename Scalar>
Vector<Scalar> model_weighted(const PowerLawFamily<Scalar>& family, const Vector<Scalar>& theta, Scalar c,
                              ScoreMethod method = ScoreMethod::ClosedForm) {
  const Matrix<Scalar> s = score_matrix(family, theta, method);
  const ProbMeasure<Scalar> tilted = escort(family.member(theta), Alpha<Scalar>(Scalar(1) + c));
  return s * tilted.weights();
}

/// Left minus right side of the weighted estimating equation
///   sum_i P(x_i)^c s(x_i) / sum_i P(x_i)^c = sum_y P(y)^(c+1) s(y) / sum_y P(y)^(c+1).
template <typename Scalar>
Vector<Scalar> estimating_equation_residual(const PowerLawFamily<Scalar>& family, const SampleSet& samples,
                                            const Vector<Scalar>& theta, Scalar c,
                                            ScoreMethod method = ScoreMethod::ClosedForm) {
  using std::pow;
  require(c >= Scalar(0), ErrorCode::InvalidArgument, "c must be nonnegative");
  const ProbMeasure<Scalar> p = family.member(theta);
  for (Index x : samples.observations())
    require(p.in_support(x), ErrorCode::DegenerateDenominator, "a sample has zero model probability");
  const Matrix<Scalar> s = score_matrix(family, theta, method);
  Vector<Scalar> lhs = Vector<Scalar>::Zero(family.dimension());
  Scalar total(0);
  for (Index x : samples.observations()) {
    const Scalar w = pow(p(x), c);
    lhs += w * s.col(x);
    total += w;
  }
  if (!(total > Scalar(0))) throw Error(ErrorCode::DegenerateDenominator, "all sample weights vanish");
  lhs /= total;
  Vector<Scalar> rhs = Vector<Scalar>::Zero(family.dimension());
  Scalar mass(0);
  for (Index y = 0; y < p.size(); ++y) {
    const Scalar w = pow(p(y), c + Scalar(1));
    rhs += w * s.col(y);
    mass += w;
  }
  return lhs - rhs / mass;
}

}  // namespace alphaproj

#endif  // ALPHAPROJ_REVERSE_PROJECTION_HPP
