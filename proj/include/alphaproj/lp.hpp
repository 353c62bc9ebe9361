#ifndef ALPHAPROJ_LP_HPP
#define ALPHAPROJ_LP_HPP

// Dense two-phase simplex for  min c.x  s.t.  A x = b, x >= 0.
// Bland's rule throughout, so it terminates on degenerate problems. Sized for
// the desk-scale feasibility problems of linear families.

#include <cmath>
#include <vector>

#include "alphaproj/measures.hpp"

namespace alphaproj {

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename Scalar>
struct LpResult {
  LpStatus status{LpStatus::Infeasible};
  Vector<Scalar> x;
  Scalar objective{0};
};

namespace detail {

template <typename Scalar>
class SimplexTableau {
 public:
  SimplexTableau(const Matrix<Scalar>& a, const Vector<Scalar>& b, Scalar tol)
      : m_(a.rows()), n_(a.cols()), tol_(tol), t_(Matrix<Scalar>::Zero(a.rows() + 1, a.cols() + a.rows() + 1)) {
    for (Index i = 0; i < m_; ++i) {
      const Scalar sign = b(i) < Scalar(0) ? Scalar(-1) : Scalar(1);
      t_.row(i).head(n_) = sign * a.row(i);
      t_(i, n_ + i) = Scalar(1);
      t_(i, rhs()) = sign * b(i);
      basis_.push_back(n_ + i);
    }
  }

  Index rhs() const { return n_ + m_; }

  /// Phase one: minimize the sum of artificials. Returns false when the
  /// constraints are inconsistent.
  bool phase_one() {
    t_.row(m_).setZero();
    for (Index i = 0; i < m_; ++i) {
      t_.row(m_).head(n_) -= t_.row(i).head(n_);
      t_(m_, rhs()) -= t_(i, rhs());
    }
    iterate(n_ + m_);
    const Scalar scale = Scalar(1) + t_.col(rhs()).head(m_).cwiseAbs().maxCoeff();
    if (-t_(m_, rhs()) > tol_ * scale) return false;
    drive_out_artificials();
    return true;
  }

  /// Phase two on the original columns. Returns false when unbounded.
  bool phase_two(const Vector<Scalar>& c) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = c.transpose();
    for (Index i = 0; i < m_; ++i) {
      const Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_ && c(j) != Scalar(0)) t_.row(m_) -= c(j) * t_.row(i);
    }
    return iterate(n_);
  }

  Vector<Scalar> solution() const {
    Vector<Scalar> x = Vector<Scalar>::Zero(n_);
    for (Index i = 0; i < m_; ++i) {
      const Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) x(j) = std::max(t_(i, rhs()), Scalar(0));
    }
    return x;
  }

 private:
  // Bland's rule: lowest-index improving column, lowest-index basic variable on ties.
  bool iterate(Index allowed_columns) {
    const Index max_pivots = 50 * (m_ + n_ + 10);
    for (Index count = 0; count < max_pivots; ++count) {
      Index enter = -1;
      for (Index j = 0; j < allowed_columns; ++j) {
        if (t_(m_, j) < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Index leave = -1;
      Scalar best_ratio(0);
      for (Index i = 0; i < m_; ++i) {
        if (t_(i, enter) <= tol_) continue;
        const Scalar ratio = t_(i, rhs()) / t_(i, enter);
        if (leave < 0 || ratio < best_ratio - tol_ ||
            (ratio <= best_ratio + tol_ && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw Error(ErrorCode::NotConverged, "simplex pivot limit reached");
  }

  void pivot(Index r, Index c) {
    t_.row(r) /= t_(r, c);
    for (Index i = 0; i <= m_; ++i) {
      if (i != r && t_(i, c) != Scalar(0)) t_.row(i) -= t_(i, c) * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  void drive_out_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      for (Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > tol_) {
          pivot(i, j);
          break;
        }
      }
      // A row with no usable column is redundant; its artificial stays at zero.
    }
  }

  Index m_;
  Index n_;
  Scalar tol_;
  Matrix<Scalar> t_;
  std::vector<Index> basis_;
};

}  // namespace detail

template <typename Scalar>
LpResult<Scalar> solve_lp(const Matrix<Scalar>& a, const Vector<Scalar>& b, const Vector<Scalar>& c,
                          Scalar tol = Scalar(1e-10)) {
  require(a.rows() == b.size() && a.cols() == c.size(), ErrorCode::DimensionMismatch,
          "inconsistent LP dimensions");
  detail::SimplexTableau<Scalar> tableau(a, b, tol);
  LpResult<Scalar> result;
  if (!tableau.phase_one()) return result;
  if (!tableau.phase_two(c)) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  result.status = LpStatus::Optimal;
  result.x = tableau.solution();
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace alphaproj

#endif  // ALPHAPROJ_LP_HPP
