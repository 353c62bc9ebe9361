#ifndef ALPHAPROJ_FORWARD_PROJECTION_HPP
#define ALPHAPROJ_FORWARD_PROJECTION_HPP

// Forward projection Q = argmin_{P in L} I_alpha(P, R).
//
// The minimizer has the power-law form Q ∝ [R^(alpha-1) + (1-alpha) F^T theta]_+^(1/(alpha-1))
// (exponential form at alpha = 1), so the solver works on theta. The moment
// equations F Q_theta = 0 are the stationarity conditions of the convex
// potential
//
//   Psi(theta) = (1/alpha) sum_x [a_theta(x)]_+^(alpha/(alpha-1)),   a_theta = R^(alpha-1) + (1-alpha) F^T theta,
//
// (Psi = sum_x R(x) exp(-theta.f(x)) at alpha = 1), whose gradient is -F u and
// Hessian F diag(a^((2-alpha)/(alpha-1))) F^T with u = [a]_+^(1/(alpha-1)).
// Damped Newton on Psi is the primary path; projected gradient on the primal
// is the fallback.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "alphaproj/divergence.hpp"
#include "alphaproj/families.hpp"
#include "alphaproj/lp.hpp"
#include "alphaproj/measures.hpp"

namespace alphaproj {

enum class ForwardMethod { Auto, DualNewton, ProjectedGradient };
enum class SolverStatus { Converged, MaxIterations, Infeasible };

inline std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Converged: return "Converged";
    case SolverStatus::MaxIterations: return "MaxIterations";
    case SolverStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

struct SolverOptions {
  double kkt_tol = 1e-8;
  int max_newton_iters = 200;
  int max_fallback_iters = 5000;
  int multistart_count = 0;
  std::uint64_t rng_seed = 0;
  ForwardMethod method = ForwardMethod::Auto;
};

/// Multipliers of  grad I_alpha(Q, R) = F^T lambda + nu 1 + mu,  mu >= 0, mu Q = 0,
/// and the residuals of that system. lambda is indexed by the original rows.
template <typename Scalar>
struct KktCertificate {
  Vector<Scalar> lambda;
  Scalar nu{0};
  Vector<Scalar> mu;
  Scalar moment_residual{0};
  Scalar stationarity_residual{0};
  Scalar dual_infeasibility{0};
  Scalar form_residual{0};

  Scalar max_residual() const {
    using std::abs;
    using std::max;
    return max(max(moment_residual, stationarity_residual), max(dual_infeasibility, form_residual));
  }
};

template <typename Scalar>
struct ProjectionResult {
  ProbMeasure<Scalar> q;
  Vector<Scalar> theta_star;          // one entry per original constraint row
  Scalar z{1};
  std::vector<Index> active_support;  // Supp(Q)
  std::vector<Index> family_support;  // Supp(L)
  Scalar kkt_residual{0};
  Scalar pythagorean_gap_bound{0};
  SolverStatus status{SolverStatus::Converged};
  KktCertificate<Scalar> kkt;
  Scalar divergence{0};               // I_alpha(Q, R)
  int iterations{0};
  bool used_fallback{false};
  bool kl_limit{false};
  int multistart_runs{0};
  Scalar multistart_spread{0};        // max total variation to Q over the extra starts
};

struct PythagoreanSides {
  double lhs;
  double rhs;
};

template <typename Scalar>
struct FamilySupport {
  std::vector<Index> support;
  ProbMeasure<Scalar> interior;  // a member of L positive exactly on Supp(L)
};

/// Supp(L), the union of the supports of all members, from a single LP:
/// maximize sum_x y(x) over F p = 0, 0 <= y <= p, y <= 1. Throws Infeasible
/// when L is empty.
template <typename Scalar>
FamilySupport<Scalar> linear_family_support(const LinearFamily<Scalar>& family) {
  const Index n = family.alphabet_size();
  const Matrix<Scalar>& f = family.constraints();
  const Index k = f.rows();
  if (k == 0) {
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index x = 0; x < n; ++x) all[static_cast<std::size_t>(x)] = x;
    return {all, ProbMeasure<Scalar>::uniform(n)};
  }
  // Columns: p, y, slack of y <= p, slack of y <= 1.
  Matrix<Scalar> a = Matrix<Scalar>::Zero(k + 2 * n, 4 * n);
  Vector<Scalar> b = Vector<Scalar>::Zero(k + 2 * n);
  Vector<Scalar> c = Vector<Scalar>::Zero(4 * n);
  const Scalar f_scale = f.cwiseAbs().maxCoeff();
  a.topLeftCorner(k, n) = f / f_scale;
  for (Index x = 0; x < n; ++x) {
    a(k + x, x) = Scalar(1);
    a(k + x, n + x) = Scalar(-1);
    a(k + x, 2 * n + x) = Scalar(-1);
    a(k + n + x, n + x) = Scalar(1);
    a(k + n + x, 3 * n + x) = Scalar(1);
    b(k + n + x) = Scalar(1);
    c(n + x) = Scalar(-1);
  }
  const LpResult<Scalar> lp = solve_lp(a, b, c);
  require(lp.status == LpStatus::Optimal, ErrorCode::NotConverged, "support LP did not solve");
  FamilySupport<Scalar> out{{}, ProbMeasure<Scalar>::uniform(n)};
  Vector<Scalar> p = Vector<Scalar>::Zero(n);
  for (Index x = 0; x < n; ++x) {
    if (lp.x(n + x) > Scalar(1e-9)) {
      out.support.push_back(x);
      p(x) = lp.x(x);
    }
  }
  if (out.support.empty()) throw Error(ErrorCode::Infeasible, "the linear family is empty");
  out.interior = ProbMeasure<Scalar>::normalized(p);
  return out;
}

/// Random members of L by hit-and-run on the polytope, started from the
/// interior point of linear_family_support. Consecutive samples are
/// `thinning` steps apart.
template <typename Scalar, typename Urbg>
std::vector<ProbMeasure<Scalar>> sample_linear_family(const LinearFamily<Scalar>& family, std::size_t count,
                                                      Urbg& rng, int thinning = 10) {
  using std::max;
  using std::min;
  const FamilySupport<Scalar> fs = linear_family_support(family);
  const Index n = family.alphabet_size();
  const auto m = static_cast<Index>(fs.support.size());
  const Matrix<Scalar>& f = family.constraints();
  Matrix<Scalar> a(f.rows() + 1, m);
  for (Index j = 0; j < m; ++j) {
    a.col(j).head(f.rows()) = f.col(fs.support[static_cast<std::size_t>(j)]);
    a(f.rows(), j) = Scalar(1);
  }
  Eigen::JacobiSVD<Matrix<Scalar>> svd(a, Eigen::ComputeFullV);
  svd.setThreshold(Scalar(1e-10));
  const Index rank = svd.rank();
  const Matrix<Scalar> null = svd.matrixV().rightCols(m - rank);

  Vector<Scalar> p(m);
  for (Index j = 0; j < m; ++j) p(j) = fs.interior(fs.support[static_cast<std::size_t>(j)]);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto step = [&] {
    if (null.cols() == 0) return;
    Vector<Scalar> g(null.cols());
    for (Index i = 0; i < g.size(); ++i) g(i) = Scalar(gauss(rng));
    const Vector<Scalar> d = null * g;
    Scalar lo = -std::numeric_limits<Scalar>::infinity();
    Scalar hi = std::numeric_limits<Scalar>::infinity();
    for (Index j = 0; j < m; ++j) {
      if (d(j) > Scalar(0)) lo = max(lo, -p(j) / d(j));
      if (d(j) < Scalar(0)) hi = min(hi, -p(j) / d(j));
    }
    const Scalar t = lo + (hi - lo) * Scalar(unit(rng));
    p += t * d;
    p = p.cwiseMax(Scalar(0));
  };
  for (int burn = 0; burn < 5 * thinning; ++burn) step();

  std::vector<ProbMeasure<Scalar>> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    for (int i = 0; i < thinning; ++i) step();
    Vector<Scalar> w = Vector<Scalar>::Zero(n);
    for (Index j = 0; j < m; ++j) w(fs.support[static_cast<std::size_t>(j)]) = p(j);
    out.push_back(ProbMeasure<Scalar>::normalized(w));
  }
  return out;
}

/// Gradient of P -> I_alpha(P, R):
///   alpha/(1-alpha) [R^(alpha-1) / sum P R^(alpha-1) - P^(alpha-1) / sum P^alpha],
/// and log(P/R) + 1 at alpha = 1. Entries where P(x) = 0 and alpha < 1 are -inf.
template <typename Scalar>
Vector<Scalar> objective_gradient(const ProbMeasure<Scalar>& p, const ProbMeasure<Scalar>& r, Alpha<Scalar> alpha) {
  using std::exp;
  using std::isfinite;
  using std::log;
  require_same_size(p, r);
  const Index n = p.size();
  Vector<Scalar> g(n);
  if (alpha.is_one()) {
    for (Index x = 0; x < n; ++x) {
      require(r.in_support(x), ErrorCode::DegenerateDenominator, "R must have full support");
      g(x) = p.in_support(x) ? log(p(x)) - log(r(x)) + Scalar(1) : -detail::infinity<Scalar>();
    }
    return g;
  }
  const Scalar a = alpha.value();
  Vector<Scalar> rp(n);
  Vector<Scalar> pp(n);
  for (Index x = 0; x < n; ++x) {
    rp(x) = exp(detail::log_pow(r(x), a - Scalar(1)));
    pp(x) = exp(detail::log_pow(p(x), a - Scalar(1)));
  }
  Scalar cross(0);
  for (Index x = 0; x < n; ++x)
    if (p.in_support(x)) cross += p(x) * rp(x);
  const Scalar power = exp(log_power_sum(p.weights(), a));
  if (!(isfinite(cross) && cross > Scalar(0) && power > Scalar(0)))
    throw Error(ErrorCode::DegenerateDenominator, "a denominator of the gradient vanishes");
  const Scalar c = a / (Scalar(1) - a);
  for (Index x = 0; x < n; ++x) g(x) = c * (rp(x) / cross - pp(x) / power);
  return g;
}

namespace detail {

// The dual potential restricted to a set of coordinates and independent rows.
template <typename Scalar>
class DualPotential {
 public:
  struct Point {
    bool admissible{false};
    Scalar psi{0};
    Vector<Scalar> a;  // affine term, or log u at alpha = 1
    Vector<Scalar> u;
    Vector<Scalar> moments;  // F u
    Scalar mass{0};
    Scalar residual{0};      // ||F u||_inf / sum u
  };

  DualPotential(Scalar alpha, Matrix<Scalar> f, Vector<Scalar> r) : alpha_(alpha), f_(std::move(f)) {
    using std::log;
    using std::pow;
    base_ = Vector<Scalar>(r.size());
    for (Index x = 0; x < r.size(); ++x)
      base_(x) = alpha_ == Scalar(1) ? log(r(x)) : pow(r(x), alpha_ - Scalar(1));
  }

  Index dimension() const { return f_.rows(); }
  const Matrix<Scalar>& constraints() const { return f_; }
  const Vector<Scalar>& base() const { return base_; }
  Scalar alpha() const { return alpha_; }

  Vector<Scalar> affine(const Vector<Scalar>& theta) const {
    if (alpha_ == Scalar(1)) return base_ - f_.transpose() * theta;
    return base_ + (Scalar(1) - alpha_) * (f_.transpose() * theta);
  }

  Point evaluate(const Vector<Scalar>& theta) const {
    using std::exp;
    using std::isfinite;
    using std::log;
    Point pt;
    pt.a = affine(theta);
    const Index n = pt.a.size();
    pt.u = Vector<Scalar>::Zero(n);
    if (alpha_ == Scalar(1)) {
      for (Index x = 0; x < n; ++x) pt.u(x) = exp(pt.a(x));
      pt.psi = pt.u.sum();
    } else {
      const Scalar beta = Scalar(1) / (alpha_ - Scalar(1));
      for (Index x = 0; x < n; ++x) {
        if (pt.a(x) > Scalar(0)) {
          pt.u(x) = exp(beta * log(pt.a(x)));
        } else if (alpha_ < Scalar(1)) {
          return pt;  // outside the barrier
        }
      }
      pt.psi = pt.a.cwiseMax(Scalar(0)).dot(pt.u) / alpha_;
    }
    pt.mass = pt.u.sum();
    if (!(pt.mass > Scalar(0)) || !isfinite(pt.mass) || !isfinite(pt.psi)) return pt;
    pt.moments = f_ * pt.u;
    pt.residual = f_.rows() == 0 ? Scalar(0) : pt.moments.cwiseAbs().maxCoeff() / pt.mass;
    pt.admissible = true;
    return pt;
  }

  // Curvature weights; at alpha > 1 only coordinates in the current clip
  // pattern contribute.
  Matrix<Scalar> hessian(const Point& pt, const std::vector<char>& pattern) const {
    using std::max;
    using std::pow;
    const Index n = pt.a.size();
    Vector<Scalar> w(n);
    for (Index x = 0; x < n; ++x) {
      if (alpha_ == Scalar(1)) {
        w(x) = pt.u(x);
      } else if (alpha_ < Scalar(1)) {
        w(x) = pt.u(x) / pt.a(x);
      } else {
        w(x) = pattern[static_cast<std::size_t>(x)]
                   ? pow(max(pt.a(x), Scalar(1e-12)), (Scalar(2) - alpha_) / (alpha_ - Scalar(1)))
                   : Scalar(0);
      }
    }
    return f_ * w.asDiagonal() * f_.transpose();
  }

 private:
  Scalar alpha_;
  Matrix<Scalar> f_;
  Vector<Scalar> base_;
};

template <typename Scalar>
struct DualSolve {
  Vector<Scalar> theta;
  bool converged{false};
  int iterations{0};
  Scalar residual{0};
};

template <typename Scalar>
DualSolve<Scalar> dual_newton(const DualPotential<Scalar>& dual, Vector<Scalar> theta, const SolverOptions& opts) {
  using std::abs;
  using std::isfinite;
  const Scalar target = Scalar(1e-3 * opts.kkt_tol);
  const Scalar armijo(1e-4);
  const Scalar band(1e-12);
  typename DualPotential<Scalar>::Point pt = dual.evaluate(theta);
  require(pt.admissible, ErrorCode::InadmissibleTheta, "Newton start is not admissible");
  std::vector<char> pattern(static_cast<std::size_t>(pt.a.size()));
  for (Index x = 0; x < pt.a.size(); ++x) pattern[static_cast<std::size_t>(x)] = pt.a(x) > Scalar(0);

  DualSolve<Scalar> out;
  const Index k = dual.dimension();
  for (out.iterations = 0; out.iterations < opts.max_newton_iters; ++out.iterations) {
    if (pt.residual <= target || k == 0) break;
    const Vector<Scalar> grad = -pt.moments;
    const Matrix<Scalar> h = dual.hessian(pt, pattern);
    const Scalar diag_scale = Scalar(1) + h.diagonal().cwiseAbs().maxCoeff();

    bool accepted = false;
    // Plain Newton first, then Levenberg shifts, then steepest descent.
    for (int attempt = 0; attempt < 8 && !accepted; ++attempt) {
      Vector<Scalar> delta;
      if (attempt < 7) {
        const Scalar shift = attempt == 0 ? Scalar(1e-14) * diag_scale
                                          : diag_scale * Scalar(std::pow(10.0, 2 * attempt - 10));
        Matrix<Scalar> shifted = h;
        shifted.diagonal().array() += shift;
        delta = shifted.ldlt().solve(-grad);
      } else {
        delta = -grad / diag_scale;
      }
      if (!delta.allFinite()) continue;
      Scalar slope = grad.dot(delta);
      if (!(slope < Scalar(0))) {
        delta = -grad / diag_scale;
        slope = grad.dot(delta);
      }
      Scalar step(1);
      for (int halving = 0; halving <= 30; ++halving, step /= Scalar(2)) {
        const Vector<Scalar> trial_theta = theta + step * delta;
        const auto trial = dual.evaluate(trial_theta);
        if (!trial.admissible) continue;
        const bool sufficient = trial.psi <= pt.psi + armijo * step * slope;
        const bool flat_but_better =
            trial.psi <= pt.psi + Scalar(1e-13) * abs(pt.psi) && trial.residual < pt.residual;
        if (sufficient || flat_but_better) {
          theta = trial_theta;
          pt = trial;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;
    for (Index x = 0; x < pt.a.size(); ++x) {
      char& in = pattern[static_cast<std::size_t>(x)];
      if (in && pt.a(x) < -band) in = 0;
      if (!in && pt.a(x) > band) in = 1;
    }
  }
  out.theta = theta;
  out.residual = pt.residual;
  out.converged = isfinite(pt.residual) && pt.residual <= Scalar(opts.kkt_tol);
  return out;
}

// Euclidean projection onto {A p = b} ∩ {p >= 0} by Dykstra's algorithm.
template <typename Scalar>
class PolytopeProjector {
 public:
  PolytopeProjector(const Matrix<Scalar>& a, const Vector<Scalar>& b) : a_(a), b_(b) {
    gram_ = (a_ * a_.transpose()).ldlt();
  }

  Vector<Scalar> affine(const Vector<Scalar>& z) const {
    return z - a_.transpose() * gram_.solve(a_ * z - b_);
  }

  Vector<Scalar> operator()(const Vector<Scalar>& z) const {
    Vector<Scalar> x = z;
    Vector<Scalar> q = Vector<Scalar>::Zero(z.size());
    for (int it = 0; it < 500; ++it) {
      const Vector<Scalar> y = affine(x);
      const Vector<Scalar> next = (y + q).cwiseMax(Scalar(0));
      q = y + q - next;
      const Scalar change = (next - x).cwiseAbs().maxCoeff();
      x = next;
      if (change < Scalar(1e-15)) break;
    }
    return x;
  }

 private:
  Matrix<Scalar> a_;
  Vector<Scalar> b_;
  Eigen::LDLT<Matrix<Scalar>> gram_;
};

template <typename Scalar>
struct PrimalSolve {
  Vector<Scalar> p;
  bool converged{false};
  int iterations{0};
};

// Projected gradient with Armijo backtracking on the working coordinates.
template <typename Scalar>
PrimalSolve<Scalar> projected_gradient(const Matrix<Scalar>& f, const Vector<Scalar>& start,
                                       const std::vector<Index>& coords, const ProbMeasure<Scalar>& r,
                                       Alpha<Scalar> alpha, const SolverOptions& opts) {
  using std::max;
  const Index n = r.size();
  const auto m = static_cast<Index>(coords.size());
  Matrix<Scalar> a(f.rows() + 1, m);
  a.topRows(f.rows()) = f;
  a.row(f.rows()).setOnes();
  Vector<Scalar> b = Vector<Scalar>::Zero(f.rows() + 1);
  b(f.rows()) = Scalar(1);
  const PolytopeProjector<Scalar> project(a, b);

  auto embed = [&](const Vector<Scalar>& p) {
    Vector<Scalar> w = Vector<Scalar>::Zero(n);
    for (Index j = 0; j < m; ++j) w(coords[static_cast<std::size_t>(j)]) = max(p(j), Scalar(0));
    return ProbMeasure<Scalar>::normalized(w);
  };
  auto objective = [&](const Vector<Scalar>& p) { return relative_alpha_entropy(embed(p), r, alpha).value; };
  auto gradient = [&](const Vector<Scalar>& p) {
    Vector<Scalar> floored = p.cwiseMax(Scalar(1e-16));
    floored /= floored.sum();
    const Vector<Scalar> full = objective_gradient(embed(floored), r, alpha);
    Vector<Scalar> g(m);
    for (Index j = 0; j < m; ++j) g(j) = full(coords[static_cast<std::size_t>(j)]);
    return g;
  };

  PrimalSolve<Scalar> out;
  out.p = project(start);
  Scalar value = objective(out.p);
  Scalar step(1);
  for (out.iterations = 0; out.iterations < opts.max_fallback_iters; ++out.iterations) {
    const Vector<Scalar> g = gradient(out.p);
    const Vector<Scalar> g_scaled = g / max(Scalar(1), g.cwiseAbs().maxCoeff());
    const Scalar stationarity = (out.p - project(out.p - g_scaled)).cwiseAbs().maxCoeff();
    if (stationarity <= Scalar(opts.kkt_tol)) {
      out.converged = true;
      break;
    }
    step *= Scalar(4);
    bool accepted = false;
    for (int halving = 0; halving < 50; ++halving, step /= Scalar(2)) {
      const Vector<Scalar> trial = project(out.p - step * g_scaled);
      const Scalar trial_value = objective(trial);
      if (trial_value <= value + Scalar(1e-4) * g.dot(trial - out.p)) {
        out.p = trial;
        value = trial_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return out;
}

template <typename Scalar>
std::vector<Index> complement_rows(const std::vector<Index>& kept, Index total) {
  std::vector<Index> rest;
  for (Index i = 0; i < total; ++i)
    if (std::find(kept.begin(), kept.end(), i) == kept.end()) rest.push_back(i);
  return rest;
}

// Working problem: coordinates (Supp(L) for alpha <= 1, all of X above one)
// and a maximal independent set of constraint rows on them.
template <typename Scalar>
struct WorkingSet {
  std::vector<Index> coords;
  std::vector<Index> rows;  // indices into the original rows of L
  Matrix<Scalar> f;
};

template <typename Scalar>
WorkingSet<Scalar> working_set(const LinearFamily<Scalar>& family, const std::vector<Index>& coords) {
  const Matrix<Scalar>& full = family.original_constraints();
  Matrix<Scalar> restricted(full.rows(), static_cast<Index>(coords.size()));
  for (std::size_t j = 0; j < coords.size(); ++j) restricted.col(static_cast<Index>(j)) = full.col(coords[j]);
  WorkingSet<Scalar> ws;
  ws.coords = coords;
  ws.rows = independent_rows(restricted);
  ws.f = select_rows(restricted, ws.rows);
  return ws;
}

}  // namespace detail

/// Verifies the optimality system at Q. `coords` are the coordinates on which
/// the problem is posed; lambda and nu are fitted on Supp(Q) and mu is what is
/// left over elsewhere.
template <typename Scalar>
KktCertificate<Scalar> kkt_certificate(const LinearFamily<Scalar>& family, const ProbMeasure<Scalar>& q,
                                       const ProbMeasure<Scalar>& r, Alpha<Scalar> alpha,
                                       const std::vector<Index>& coords);

namespace detail {

// Multipliers (lambda, nu) with f.lambda + nu = g on the support and
// f.lambda + nu <= g off it, by LP: minimize the support residual plus a
// small multiple of |lambda|. nu is pinned to zero when fix_nu is set.
template <typename Scalar>
std::optional<Vector<Scalar>> sign_constrained_multipliers(const Matrix<Scalar>& f, const Vector<Scalar>& g,
                                                           const std::vector<Index>& supp,
                                                           const std::vector<Index>& coords,
                                                           const ProbMeasure<Scalar>& q, bool fix_nu) {
  const Index k = f.rows();
  const auto m = static_cast<Index>(supp.size());
  std::vector<Index> off;
  for (Index x : coords)
    if (!q.in_support(x)) off.push_back(x);
  const auto o = static_cast<Index>(off.size());
  // Columns: lambda+ (k), lambda- (k), nu+, nu-, e+ (m), e- (m), slack (o).
  const Index cols = 2 * k + 2 + 2 * m + o;
  Matrix<Scalar> a = Matrix<Scalar>::Zero(m + o, cols);
  Vector<Scalar> b(m + o);
  Vector<Scalar> c = Vector<Scalar>::Zero(cols);
  c.head(2 * k).setConstant(Scalar(1e-6));
  c.segment(2 * k + 2, 2 * m).setOnes();
  auto fill = [&](Index rowi, Index x) {
    a.block(rowi, 0, 1, k) = f.col(x).transpose();
    a.block(rowi, k, 1, k) = -f.col(x).transpose();
    a(rowi, 2 * k) = fix_nu ? Scalar(0) : Scalar(1);
    a(rowi, 2 * k + 1) = fix_nu ? Scalar(0) : Scalar(-1);
    b(rowi) = g(x);
  };
  for (Index j = 0; j < m; ++j) {
    fill(j, supp[static_cast<std::size_t>(j)]);
    a(j, 2 * k + 2 + j) = Scalar(1);
    a(j, 2 * k + 2 + m + j) = Scalar(-1);
  }
  for (Index j = 0; j < o; ++j) {
    fill(m + j, off[static_cast<std::size_t>(j)]);
    a(m + j, 2 * k + 2 + 2 * m + j) = Scalar(1);
  }
  const LpResult<Scalar> lp = solve_lp(a, b, c);
  if (lp.status != LpStatus::Optimal) return std::nullopt;
  Vector<Scalar> out(k + 1);
  out.head(k) = lp.x.head(k) - lp.x.segment(k, k);
  out(k) = lp.x(2 * k) - lp.x(2 * k + 1);
  return out;
}

}  // namespace detail

template <typename Scalar>
KktCertificate<Scalar> kkt_certificate(const LinearFamily<Scalar>& family, const ProbMeasure<Scalar>& q,
                                       const ProbMeasure<Scalar>& r, Alpha<Scalar> alpha,
                                       const std::vector<Index>& coords) {
  using std::abs;
  using std::max;
  KktCertificate<Scalar> cert;
  const Matrix<Scalar>& f = family.original_constraints();
  const Index k = f.rows();
  cert.moment_residual = family.violation(q);
  cert.lambda = Vector<Scalar>::Zero(k);
  cert.mu = Vector<Scalar>::Zero(q.size());

  const Vector<Scalar> g = objective_gradient(q, r, alpha);
  std::vector<Index> supp;
  for (Index x : coords)
    if (q.in_support(x)) supp.push_back(x);
  const auto m = static_cast<Index>(supp.size());
  Matrix<Scalar> design(m, k + 1);
  Vector<Scalar> target(m);
  for (Index j = 0; j < m; ++j) {
    const Index x = supp[static_cast<std::size_t>(j)];
    design.row(j).head(k) = f.col(x).transpose();
    design(j, k) = Scalar(1);
    target(j) = g(x);
  }
  const Vector<Scalar> sol = design.completeOrthogonalDecomposition().solve(target);
  cert.lambda = sol.head(k);
  cert.nu = sol(k);
  const Scalar scale = max(Scalar(1), target.cwiseAbs().maxCoeff());
  cert.stationarity_residual = m == 0 ? Scalar(0) : (design * sol - target).cwiseAbs().maxCoeff() / scale;
  auto off_support_check = [&] {
    cert.dual_infeasibility = Scalar(0);
    for (Index x : coords) {
      if (q.in_support(x)) continue;
      cert.mu(x) = g(x) - f.col(x).dot(cert.lambda) - cert.nu;
      cert.dual_infeasibility = max(cert.dual_infeasibility, -cert.mu(x) / scale);
    }
  };
  off_support_check();
  if (cert.dual_infeasibility > Scalar(0) && m < static_cast<Index>(coords.size())) {
    const auto refit = detail::sign_constrained_multipliers(f, g, supp, coords, q, !alpha.is_one());
    if (refit) {
      const Vector<Scalar> before_lambda = cert.lambda;
      const Scalar before_nu = cert.nu;
      const Scalar before_infeasibility = cert.dual_infeasibility;
      cert.lambda = refit->head(k);
      cert.nu = (*refit)(k);
      const Scalar stationarity =
          m == 0 ? Scalar(0) : (design * *refit - target).cwiseAbs().maxCoeff() / scale;
      off_support_check();
      if (max(stationarity, cert.dual_infeasibility) <
          max(cert.stationarity_residual, before_infeasibility)) {
        cert.stationarity_residual = stationarity;
      } else {
        cert.lambda = before_lambda;
        cert.nu = before_nu;
        off_support_check();
      }
    }
  }
  // For alpha != 1, nu vanishes at the optimum since sum_x Q(x) dI/dP(x) = 0
  // and F Q = 0. The KL gradient carries the constant +1 instead.
  if (!alpha.is_one()) cert.stationarity_residual = max(cert.stationarity_residual, abs(cert.nu) / scale);
  return cert;
}

namespace detail {

template <typename Scalar>
ProjectionResult<Scalar> assemble_result(const LinearFamily<Scalar>& family, const ProbMeasure<Scalar>& r,
                                         Alpha<Scalar> alpha, const WorkingSet<Scalar>& ws,
                                         const std::vector<Index>& family_support, Vector<Scalar> q_work,
                                         Vector<Scalar> theta_work, Scalar z) {
  using std::abs;
  using std::exp;
  using std::log;
  using std::max;
  using std::min;
  using std::pow;
  const Index n = r.size();
  const auto m = static_cast<Index>(ws.coords.size());
  const Scalar a_val = alpha.value();
  const DualPotential<Scalar> dual(a_val, ws.f, [&] {
    Vector<Scalar> rr(m);
    for (Index j = 0; j < m; ++j) rr(j) = r(ws.coords[static_cast<std::size_t>(j)]);
    return rr;
  }());
  const Vector<Scalar> affine = dual.affine(theta_work);

  // Coordinates whose affine term is zero up to rounding are clipped.
  if (alpha.above_one()) {
    const Scalar cut = Scalar(1e-12) * affine.cwiseAbs().maxCoeff();
    for (Index j = 0; j < m; ++j)
      if (affine(j) <= cut) q_work(j) = Scalar(0);
  }
  Vector<Scalar> w = Vector<Scalar>::Zero(n);
  for (Index j = 0; j < m; ++j) w(ws.coords[static_cast<std::size_t>(j)]) = max(q_work(j), Scalar(0));

  ProjectionResult<Scalar> res{ProbMeasure<Scalar>::normalized(w)};
  res.theta_star = Vector<Scalar>::Zero(family.original_rows());
  for (std::size_t i = 0; i < ws.rows.size(); ++i) res.theta_star(ws.rows[i]) = theta_work(static_cast<Index>(i));
  res.z = z;
  res.active_support = res.q.support();
  res.family_support = family_support;
  res.kl_limit = alpha.is_one();
  res.divergence = relative_alpha_entropy(res.q, r, alpha).value;
  res.kkt = kkt_certificate(family, res.q, r, alpha, ws.coords);

  // Power-law form: Z^(alpha-1) Q^(alpha-1) = [a]_+ (log form at alpha = 1).
  const Scalar a_scale = max(Scalar(1), affine.cwiseAbs().maxCoeff());
  Scalar form(0);
  for (Index j = 0; j < m; ++j) {
    const Scalar qx = res.q(ws.coords[static_cast<std::size_t>(j)]);
    if (alpha.is_one()) {
      form = max(form, abs(log(qx) + log(z) - affine(j)) / a_scale);
    } else if (qx > Scalar(0)) {
      form = max(form, abs(pow(z * qx, a_val - Scalar(1)) - affine(j)) / a_scale);
    } else {
      form = max(form, max(affine(j), Scalar(0)) / a_scale);
    }
  }
  res.kkt.form_residual = form;
  res.kkt_residual = res.kkt.max_residual();

  // Bound on |I(P,R) - I(P,Q) - I(Q,R)| over P in L implied by the residual
  // of the tilted potential v = R^(alpha-1)/sum Q R^(alpha-1) - Q^(alpha-1)/sum Q^alpha.
  std::vector<Index> supp;
  for (Index x : ws.coords)
    if (res.q.in_support(x)) supp.push_back(x);
  const auto s = static_cast<Index>(supp.size());
  const Matrix<Scalar>& f = family.original_constraints();
  Matrix<Scalar> design(s, f.rows() + (alpha.is_one() ? 1 : 0));
  Vector<Scalar> v(s);
  Scalar sum_qr(0);
  for (Index x : supp) sum_qr += res.q(x) * pow(r(x), a_val - Scalar(1));
  const Scalar sum_qa = exp(log_power_sum(res.q.weights(), a_val));
  Scalar min_weight = detail::infinity<Scalar>();
  for (Index j = 0; j < s; ++j) {
    const Index x = supp[static_cast<std::size_t>(j)];
    design.row(j).head(f.rows()) = f.col(x).transpose();
    if (alpha.is_one()) {
      design(j, f.rows()) = Scalar(1);
      v(j) = log(r(x)) - log(res.q(x));
    } else {
      v(j) = pow(r(x), a_val - Scalar(1)) / sum_qr - pow(res.q(x), a_val - Scalar(1)) / sum_qa;
      min_weight = min(min_weight, pow(res.q(x), a_val - Scalar(1)) / sum_qa);
    }
  }
  const Vector<Scalar> fit = design.completeOrthogonalDecomposition().solve(v);
  const Scalar delta = s == 0 ? Scalar(0) : (design * fit - v).cwiseAbs().maxCoeff();
  if (alpha.is_one()) {
    res.pythagorean_gap_bound = Scalar(2) * delta;
  } else if (alpha.above_one() && res.active_support.size() != family_support.size()) {
    res.pythagorean_gap_bound = detail::infinity<Scalar>();  // only the inequality holds
  } else {
    const Scalar ratio = delta / min_weight;
    res.pythagorean_gap_bound = ratio >= Scalar(1) ? detail::infinity<Scalar>()
                                                   : abs(a_val / (Scalar(1) - a_val)) * abs(log(Scalar(1) - ratio));
  }
  return res;
}

template <typename Scalar>
Vector<Scalar> working_reference(const ProbMeasure<Scalar>& r, const std::vector<Index>& coords) {
  Vector<Scalar> out(static_cast<Index>(coords.size()));
  for (std::size_t j = 0; j < coords.size(); ++j) out(static_cast<Index>(j)) = r(coords[j]);
  return out;
}

// theta and Z from a primal point by a least-squares fit of the power-law form on its support.
template <typename Scalar>
std::pair<Vector<Scalar>, Scalar> fit_dual(const WorkingSet<Scalar>& ws, const Vector<Scalar>& r_work,
                                           const Vector<Scalar>& q_work, Scalar alpha) {
  using std::exp;
  using std::log;
  using std::pow;
  const Index k = ws.f.rows();
  std::vector<Index> supp;
  for (Index j = 0; j < q_work.size(); ++j)
    if (q_work(j) > Scalar(1e-14)) supp.push_back(j);
  Matrix<Scalar> design(static_cast<Index>(supp.size()), k + 1);
  Vector<Scalar> rhs(static_cast<Index>(supp.size()));
  for (std::size_t i = 0; i < supp.size(); ++i) {
    const Index j = supp[i];
    const auto row = static_cast<Index>(i);
    if (alpha == Scalar(1)) {
      design.row(row).head(k) = -ws.f.col(j).transpose();
      design(row, k) = Scalar(-1);
      rhs(row) = log(q_work(j)) - log(r_work(j));  // log Q = log R - theta.f - log Z
    } else {
      design.row(row).head(k) = (Scalar(1) - alpha) * ws.f.col(j).transpose();
      design(row, k) = -pow(q_work(j), alpha - Scalar(1));
      rhs(row) = -pow(r_work(j), alpha - Scalar(1));
    }
  }
  const Vector<Scalar> sol = design.completeOrthogonalDecomposition().solve(rhs);
  const Scalar z = alpha == Scalar(1) ? exp(sol(k)) : pow(sol(k), Scalar(1) / (alpha - Scalar(1)));
  return {sol.head(k), z};
}

}  // namespace detail

/// Forward projection of R on L. R must have full support. alpha = 1 gives
/// the classical I-projection through the same dual skeleton.
template <typename Scalar>
ProjectionResult<Scalar> forward_project(const LinearFamily<Scalar>& family, const ProbMeasure<Scalar>& r,
                                         Alpha<Scalar> alpha, const SolverOptions& opts = {}) {
  using std::abs;
  using std::max;
  using std::pow;
  require(r.size() == family.alphabet_size(), ErrorCode::DimensionMismatch,
          "reference measure and family live on different alphabets");
  require(r.has_full_support(), ErrorCode::InvalidArgument, "the reference measure needs full support");
  require(opts.kkt_tol > 0 && opts.max_newton_iters >= 0 && opts.max_fallback_iters >= 0 &&
              opts.multistart_count >= 0,
          ErrorCode::InvalidArgument, "invalid solver options");

  const FamilySupport<Scalar> fs = linear_family_support(family);
  std::vector<Index> coords = fs.support;
  if (alpha.above_one()) {
    coords.clear();
    for (Index x = 0; x < r.size(); ++x) coords.push_back(x);
  }
  const detail::WorkingSet<Scalar> ws = detail::working_set(family, coords);
  const Vector<Scalar> r_work = detail::working_reference(r, ws.coords);
  const detail::DualPotential<Scalar> dual(alpha.value(), ws.f, r_work);
  const Index k = ws.f.rows();

  auto from_theta = [&](const Vector<Scalar>& theta) {
    const auto pt = dual.evaluate(theta);
    return std::pair<Vector<Scalar>, Scalar>(pt.u / pt.mass, pt.mass);
  };

  ProjectionResult<Scalar> best{ProbMeasure<Scalar>::uniform(r.size())};
  bool have_best = false;
  int iterations = 0;
  if (opts.method != ForwardMethod::ProjectedGradient) {
    const auto solve = detail::dual_newton(dual, Vector<Scalar>(Vector<Scalar>::Zero(k)), opts);
    iterations = solve.iterations;
    const auto [q_work, z] = from_theta(solve.theta);
    best = detail::assemble_result(family, r, alpha, ws, fs.support, q_work, solve.theta, z);
    best.status = solve.converged && best.kkt_residual <= Scalar(opts.kkt_tol) ? SolverStatus::Converged
                                                                                : SolverStatus::MaxIterations;
    have_best = true;
  }
  const bool need_fallback = !have_best || (best.status != SolverStatus::Converged &&
                                            opts.method == ForwardMethod::Auto);
  if (need_fallback) {
    Vector<Scalar> start(static_cast<Index>(ws.coords.size()));
    for (std::size_t j = 0; j < ws.coords.size(); ++j) start(static_cast<Index>(j)) = fs.interior(ws.coords[j]);
    const auto primal = detail::projected_gradient(ws.f, start, ws.coords, r, alpha, opts);
    const auto [theta, z] = detail::fit_dual(ws, r_work, primal.p, alpha.value());
    auto candidate = detail::assemble_result(family, r, alpha, ws, fs.support, primal.p, theta, z);
    candidate.used_fallback = true;
    candidate.status = candidate.kkt.moment_residual <= Scalar(opts.kkt_tol) &&
                               candidate.kkt_residual <= Scalar(opts.kkt_tol)
                           ? SolverStatus::Converged
                           : SolverStatus::MaxIterations;
    iterations += primal.iterations;
    if (!have_best || candidate.kkt_residual < best.kkt_residual) best = candidate;
  }
  best.iterations = iterations;

  // Extra dual starts; uniqueness says they all land on the same Q.
  if (opts.multistart_count > 0 && k > 0) {
    std::mt19937_64 rng(opts.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Scalar a_val = alpha.value();
    for (int run = 0; run < opts.multistart_count; ++run) {
      Vector<Scalar> d(k);
      for (Index i = 0; i < k; ++i) d(i) = Scalar(gauss(rng));
      const Vector<Scalar> slope = ws.f.transpose() * d;
      const Scalar slope_max = max(slope.cwiseAbs().maxCoeff(), Scalar(1e-300));
      Scalar reach;
      if (alpha.is_one()) {
        reach = Scalar(3) / slope_max;
      } else if (alpha.below_one()) {
        // Stay inside the open polytope {a > 0}.
        reach = detail::infinity<Scalar>();
        for (Index j = 0; j < slope.size(); ++j) {
          const Scalar rate = (Scalar(1) - a_val) * slope(j);
          if (rate < Scalar(0)) reach = std::min(reach, dual.base()(j) / -rate);
        }
        if (reach == detail::infinity<Scalar>()) reach = Scalar(3) / slope_max;
        reach *= Scalar(0.9);
      } else {
        reach = Scalar(3) * dual.base().maxCoeff() / ((a_val - Scalar(1)) * slope_max);
      }
      const Vector<Scalar> theta0 = Scalar(unit(rng)) * reach * d;
      if (!dual.evaluate(theta0).admissible) continue;
      const auto solve = detail::dual_newton(dual, theta0, opts);
      ++best.multistart_runs;
      const auto [q_work, z] = from_theta(solve.theta);
      Vector<Scalar> w = Vector<Scalar>::Zero(r.size());
      for (std::size_t j = 0; j < ws.coords.size(); ++j) w(ws.coords[j]) = q_work(static_cast<Index>(j));
      const ProbMeasure<Scalar> qi = ProbMeasure<Scalar>::normalized(w);
      best.multistart_spread = max(best.multistart_spread, solve.converged ? total_variation(qi, best.q)
                                                                           : detail::infinity<Scalar>());
    }
  }
  return best;
}

/// Both sides of I(P,R) vs I(P,Q) + I(Q,R) for a member P of L.
template <typename Scalar>
PythagoreanSides pythagorean_check(const LinearFamily<Scalar>& family, const ProbMeasure<Scalar>& p,
                                   const ProjectionResult<Scalar>& projection, const ProbMeasure<Scalar>& r,
                                   Alpha<Scalar> alpha) {
  if (!family.contains(p)) throw Error(ErrorCode::NotInFamily, "P is not a member of the linear family");
  const auto lhs = relative_alpha_entropy(p, r, alpha);
  const auto to_q = relative_alpha_entropy(p, projection.q, alpha);
  const auto q_to_r = relative_alpha_entropy(projection.q, r, alpha);
  return {static_cast<double>(lhs.value), static_cast<double>(to_q.value + q_to_r.value)};
}

}  // namespace alphaproj

#endif  // ALPHAPROJ_FORWARD_PROJECTION_HPP
