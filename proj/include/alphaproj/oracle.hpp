#ifndef ALPHAPROJ_ORACLE_HPP
#define ALPHAPROJ_ORACLE_HPP

// Brute-force references: simplex lattice search for forward projections,
// theta-grid search for reverse projections, and a 50-digit evaluation of the
// divergence. None of them shares code with the solvers beyond the measure
// and family types.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "alphaproj/divergence.hpp"
#include "alphaproj/families.hpp"
#include "alphaproj/measures.hpp"

namespace alphaproj {

using HighPrecision = boost::multiprecision::cpp_bin_float_50;

struct GridSpec {
  double resolution = 0.05;
  int refine_rounds = 3;
};

template <typename Scalar>
struct GridForwardResult {
  ProbMeasure<Scalar> p;
  Scalar value;
  std::size_t evaluated;
};

inline constexpr Index kOracleMaxAlphabet = 6;

namespace detail {

// Affine projection onto {F p = 0, sum p = 1} moving only the nonzero
// coordinates of the input, cached per zero pattern.
class FaceSnapper {
 public:
  explicit FaceSnapper(const Matrix<double>& f) : f_(f) {}

  bool snap(Vector<double>& p) {
    const Index n = p.size();
    std::uint32_t mask = 0;
    for (Index x = 0; x < n; ++x)
      if (p(x) > 0.0) mask |= 1u << x;
    auto it = cache_.find(mask);
    if (it == cache_.end()) it = cache_.emplace(mask, build(mask, n)).first;
    const Face& face = it->second;
    Vector<double> sub(static_cast<Index>(face.coords.size()));
    for (std::size_t j = 0; j < face.coords.size(); ++j) sub(static_cast<Index>(j)) = p(face.coords[j]);
    Vector<double> residual = face.a * sub;
    residual(residual.size() - 1) -= 1.0;
    sub -= face.correction * residual;
    if ((face.a * sub - face.b).cwiseAbs().maxCoeff() > 1e-12) return false;
    for (std::size_t j = 0; j < face.coords.size(); ++j) {
      if (sub(static_cast<Index>(j)) < 0.0) return false;
      p(face.coords[j]) = sub(static_cast<Index>(j));
    }
    return true;
  }

 private:
  struct Face {
    std::vector<Index> coords;
    Matrix<double> a;
    Vector<double> b;
    Matrix<double> correction;  // pinv(a)
  };

  Face build(std::uint32_t mask, Index n) const {
    Face face;
    for (Index x = 0; x < n; ++x)
      if (mask & (1u << x)) face.coords.push_back(x);
    const auto m = static_cast<Index>(face.coords.size());
    face.a = Matrix<double>(f_.rows() + 1, m);
    for (Index j = 0; j < m; ++j) {
      face.a.col(j).head(f_.rows()) = f_.col(face.coords[static_cast<std::size_t>(j)]);
      face.a(f_.rows(), j) = 1.0;
    }
    face.b = Vector<double>::Zero(f_.rows() + 1);
    face.b(f_.rows()) = 1.0;
    face.correction = face.a.completeOrthogonalDecomposition().pseudoInverse();
    return face;
  }

  Matrix<double> f_;
  std::unordered_map<std::uint32_t, Face> cache_;
};

// I_alpha(P, R) for a full-support R with the R-only sums precomputed.
class ForwardObjective {
 public:
  ForwardObjective(const ProbMeasure<double>& r, double alpha) : alpha_(alpha), r_(r.weights()) {
    rp_ = r_.array().pow(alpha - 1.0);
    log_r_alpha_ = std::log(r_.array().pow(alpha).sum());
  }

  double operator()(const Vector<double>& p) const {
    if (alpha_ == 1.0) {
      double kl = 0.0;
      for (Index x = 0; x < p.size(); ++x)
        if (p(x) > 0.0) kl += p(x) * std::log(p(x) / r_(x));
      return kl;
    }
    double cross = 0.0;
    double power = 0.0;
    for (Index x = 0; x < p.size(); ++x) {
      if (p(x) <= 0.0) continue;
      cross += p(x) * rp_(x);
      power += std::pow(p(x), alpha_);
    }
    return alpha_ / (1.0 - alpha_) * std::log(cross) - std::log(power) / (1.0 - alpha_) + log_r_alpha_;
  }

 private:
  double alpha_;
  Vector<double> r_;
  Vector<double> rp_;
  double log_r_alpha_;
};

// Visits every composition of `total` into `parts` nonnegative integers.
template <typename Visit>
void for_each_composition(long total, Index parts, std::vector<long>& buffer, Index at, Visit&& visit) {
  if (at == parts - 1) {
    buffer[static_cast<std::size_t>(at)] = total;
    visit(buffer);
    return;
  }
  for (long v = 0; v <= total; ++v) {
    buffer[static_cast<std::size_t>(at)] = v;
    for_each_composition(total - v, parts, buffer, at + 1, visit);
  }
}

}  // namespace detail

/// Exhaustive lattice search over {P in simplex : P in L} followed by local
/// refinement rounds, each shrinking the lattice step by 10 around the
/// incumbent. Lattice points within 2 step ||F||_inf of L are snapped onto L
/// (keeping their zero pattern) before evaluation.
inline GridForwardResult<double> grid_forward_oracle(const LinearFamily<double>& family, const ProbMeasure<double>& r,
                                                     Alpha<double> alpha, const GridSpec& grid = {}) {
  const Index n = family.alphabet_size();
  if (n > kOracleMaxAlphabet) throw Error(ErrorCode::TooLarge, "grid oracle is limited to 6 symbols");
  require(r.size() == n, ErrorCode::DimensionMismatch, "size mismatch");
  require(r.has_full_support(), ErrorCode::InvalidArgument, "the reference measure needs full support");
  require(grid.resolution > 0.0 && grid.resolution <= 0.5 && grid.refine_rounds >= 0, ErrorCode::InvalidArgument,
          "invalid grid specification");

  const Matrix<double>& f = family.original_constraints();
  const double f_norm = f.rows() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
  detail::FaceSnapper snapper(f);
  const detail::ForwardObjective objective(r, alpha.value());

  Vector<double> best_p;
  double best_value = detail::infinity<double>();
  std::size_t evaluated = 0;
  auto consider = [&](Vector<double> p, double step) {
    if (f.rows() > 0 && (f * p).cwiseAbs().maxCoeff() > 2.0 * step * f_norm) return;
    if (!snapper.snap(p)) return;
    ++evaluated;
    const double value = objective(p);
    if (value < best_value) {
      best_value = value;
      best_p = p;
    }
  };

  double step = grid.resolution;
  long total = static_cast<long>(std::ceil(1.0 / step - 1e-9));
  step = 1.0 / static_cast<double>(total);
  std::vector<long> buffer(static_cast<std::size_t>(n));
  detail::for_each_composition(total, n, buffer, 0, [&](const std::vector<long>& c) {
    Vector<double> p(n);
    for (Index x = 0; x < n; ++x) p(x) = static_cast<double>(c[static_cast<std::size_t>(x)]) / static_cast<double>(total);
    consider(p, step);
  });
  if (best_p.size() == 0) throw Error(ErrorCode::Infeasible, "no lattice point near the linear family");

  // Local windows shrink with the alphabet so that a round stays near 2e5 points.
  const long window = std::min<long>(10, static_cast<long>((std::pow(2e5, 1.0 / static_cast<double>(n - 1)) - 1) / 2));
  for (int round = 0; round < grid.refine_rounds; ++round) {
    total *= 10;
    step = 1.0 / static_cast<double>(total);
    std::vector<long> centre(static_cast<std::size_t>(n));
    for (Index x = 0; x < n; ++x) centre[static_cast<std::size_t>(x)] = std::lround(best_p(x) * static_cast<double>(total));
    std::vector<long> offset(static_cast<std::size_t>(n - 1), -window);
    while (true) {
      Vector<double> p(n);
      long used = 0;
      bool valid = true;
      for (Index x = 0; x + 1 < n && valid; ++x) {
        const long v = centre[static_cast<std::size_t>(x)] + offset[static_cast<std::size_t>(x)];
        valid = v >= 0;
        used += v;
        p(x) = static_cast<double>(v);
      }
      const long last = total - used;
      if (valid && last >= 0) {
        p(n - 1) = static_cast<double>(last);
        consider(p / static_cast<double>(total), step);
      }
      Index d = 0;
      while (d < n - 1 && ++offset[static_cast<std::size_t>(d)] > window) offset[static_cast<std::size_t>(d++)] = -window;
      if (d == n - 1) break;
    }
  }
  return {ProbMeasure<double>::normalized(best_p), best_value, evaluated};
}

struct ThetaGrid {
  std::vector<double> lo;
  std::vector<double> hi;
  double step = 1e-3;
};

struct GridMinimum {
  Vector<double> theta;
  double value;
};

using MemberFunction = std::function<ProbMeasure<double>(const Vector<double>&)>;

namespace detail {

// Divergence from P^ to the member at theta; +inf when theta is not admissible.
inline double reverse_objective(const MemberFunction& member, const ProbMeasure<double>& p_hat, Alpha<double> alpha,
                                const Vector<double>& theta) {
  try {
    const auto d = relative_alpha_entropy(p_hat, member(theta), alpha);
    return d.finite ? d.value : detail::infinity<double>();
  } catch (const Error&) {
    return detail::infinity<double>();
  }
}

}  // namespace detail

/// Tensor-grid search over theta with every grid-local minimum refined by
/// golden-section search (k = 1) or compass search (k >= 2). Refinement stays
/// inside the box [lo, hi].
inline std::vector<GridMinimum> grid_reverse_oracle(const MemberFunction& member, const ProbMeasure<double>& p_hat,
                                                    Alpha<double> alpha, const ThetaGrid& grid) {
  const auto k = static_cast<Index>(grid.lo.size());
  require(k >= 1 && grid.hi.size() == grid.lo.size() && grid.step > 0.0, ErrorCode::InvalidArgument,
          "invalid theta grid");
  std::vector<Index> counts(static_cast<std::size_t>(k));
  std::size_t cells = 1;
  for (Index i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    require(grid.hi[idx] > grid.lo[idx], ErrorCode::InvalidArgument, "empty theta range");
    counts[idx] = static_cast<Index>(std::floor((grid.hi[idx] - grid.lo[idx]) / grid.step + 1e-9)) + 1;
    cells *= static_cast<std::size_t>(counts[idx]);
  }
  if (cells > 50'000'000) throw Error(ErrorCode::TooLarge, "theta grid is too large");

  auto theta_at = [&](const std::vector<Index>& index) {
    Vector<double> theta(k);
    for (Index i = 0; i < k; ++i)
      theta(i) = grid.lo[static_cast<std::size_t>(i)] + grid.step * static_cast<double>(index[static_cast<std::size_t>(i)]);
    return theta;
  };
  auto flat = [&](const std::vector<Index>& index) {
    std::size_t pos = 0;
    for (Index i = k - 1; i >= 0; --i)
      pos = pos * static_cast<std::size_t>(counts[static_cast<std::size_t>(i)]) +
            static_cast<std::size_t>(index[static_cast<std::size_t>(i)]);
    return pos;
  };

  std::vector<double> values(cells);
  std::vector<Index> index(static_cast<std::size_t>(k), 0);
  for (std::size_t c = 0; c < cells; ++c) {
    values[flat(index)] = detail::reverse_objective(member, p_hat, alpha, theta_at(index));
    for (Index i = 0; i < k && ++index[static_cast<std::size_t>(i)] == counts[static_cast<std::size_t>(i)]; ++i)
      index[static_cast<std::size_t>(i)] = 0;
  }

  std::vector<GridMinimum> minima;
  index.assign(static_cast<std::size_t>(k), 0);
  for (std::size_t c = 0; c < cells; ++c) {
    const double v = values[flat(index)];
    bool local = std::isfinite(v);
    // Compare against all 3^k - 1 neighbours; ties count toward the lower index only.
    std::vector<int> delta(static_cast<std::size_t>(k), -1);
    while (local) {
      bool centre = true;
      std::vector<Index> nb = index;
      bool inside = true;
      for (Index i = 0; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        centre = centre && delta[idx] == 0;
        nb[idx] += delta[idx];
        inside = inside && nb[idx] >= 0 && nb[idx] < counts[idx];
      }
      if (!centre && inside) {
        const double w = values[flat(nb)];
        const bool before = flat(nb) < flat(index);
        if (w < v || (w == v && before)) local = false;
      }
      Index d = 0;
      while (d < k && ++delta[static_cast<std::size_t>(d)] > 1) delta[static_cast<std::size_t>(d++)] = -1;
      if (d == k) break;
    }
    if (local) minima.push_back({theta_at(index), v});
    for (Index i = 0; i < k && ++index[static_cast<std::size_t>(i)] == counts[static_cast<std::size_t>(i)]; ++i)
      index[static_cast<std::size_t>(i)] = 0;
  }

  auto f = [&](const Vector<double>& theta) { return detail::reverse_objective(member, p_hat, alpha, theta); };
  for (GridMinimum& m : minima) {
    if (k == 1) {
      const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
      double a = std::max(grid.lo[0], m.theta(0) - grid.step);
      double b = std::min(grid.hi[0], m.theta(0) + grid.step);
      double c = b - phi * (b - a);
      double d = a + phi * (b - a);
      double fc = f(Vector<double>::Constant(1, c));
      double fd = f(Vector<double>::Constant(1, d));
      while (b - a > 1e-13) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - phi * (b - a);
          fc = f(Vector<double>::Constant(1, c));
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + phi * (b - a);
          fd = f(Vector<double>::Constant(1, d));
        }
      }
      const Vector<double> t = Vector<double>::Constant(1, 0.5 * (a + b));
      const double ft = f(t);
      if (ft <= m.value) m = {t, ft};
    } else {
      double h = grid.step / 2.0;
      while (h > 1e-11) {
        bool moved = false;
        for (Index i = 0; i < k && !moved; ++i) {
          for (double sign : {1.0, -1.0}) {
            Vector<double> t = m.theta;
            t(i) += sign * h;
            const auto idx = static_cast<std::size_t>(i);
            if (t(i) < grid.lo[idx] || t(i) > grid.hi[idx]) continue;
            const double ft = f(t);
            if (ft < m.value) {
              m = {t, ft};
              moved = true;
              break;
            }
          }
        }
        if (!moved) h /= 2.0;
      }
    }
  }
  return minima;
}

/// I_alpha(P, Q) from the expanded form in 50-digit binary floating point.
/// The weights are taken exactly as given (no renormalization).
inline HighPrecision highprec_divergence(const Vector<double>& p, const Vector<double>& q, double alpha_value) {
  using boost::multiprecision::log;
  using boost::multiprecision::pow;
  require(p.size() == q.size(), ErrorCode::DimensionMismatch, "size mismatch");
  const HighPrecision a(alpha_value);
  const HighPrecision one(1);
  bool overlap = false;
  bool p_outside_q = false;
  for (Index x = 0; x < p.size(); ++x) {
    overlap = overlap || (p(x) > 0 && q(x) > 0);
    p_outside_q = p_outside_q || (p(x) > 0 && q(x) == 0);
  }
  if (alpha_value <= 1.0 && p_outside_q) return std::numeric_limits<HighPrecision>::infinity();
  if (alpha_value > 1.0 && !overlap) return std::numeric_limits<HighPrecision>::infinity();
  if (p == q) return HighPrecision(0);

  if (alpha_value == 1.0) {
    HighPrecision kl(0);
    for (Index x = 0; x < p.size(); ++x)
      if (p(x) > 0) kl += HighPrecision(p(x)) * log(HighPrecision(p(x)) / HighPrecision(q(x)));
    return kl;
  }
  HighPrecision cross(0);
  HighPrecision sum_p(0);
  HighPrecision sum_q(0);
  for (Index x = 0; x < p.size(); ++x) {
    const HighPrecision px(p(x));
    const HighPrecision qx(q(x));
    if (px > 0 && qx > 0) cross += px * pow(qx, a - one);
    if (px > 0) sum_p += pow(px, a);
    if (qx > 0) sum_q += pow(qx, a);
  }
  return a / (one - a) * log(cross) - log(sum_p) / (one - a) + log(sum_q);
}

}  // namespace alphaproj

#endif  // ALPHAPROJ_ORACLE_HPP
