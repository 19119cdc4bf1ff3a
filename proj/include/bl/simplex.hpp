#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bl {

// Dense two-phase simplex for min c^T x s.t. A x = b, x >= 0, with Bland's
// rule. Instantiated with double (tolerance pivoting) and with an exact
// rational type (tolerance 0) for the feasibility fallback.

enum class LPStatus { optimal, infeasible, unbounded };

template <class T>
struct LPResult {
  LPStatus status = LPStatus::infeasible;
  std::vector<T> x;
  T objective{};
};

template <class T>
struct lp_field {
  static T tol() { return T(0); }
};
template <>
struct lp_field<double> {
  static double tol() { return 1e-9; }
};

template <class T>
class SimplexTableau {
 public:
  SimplexTableau(std::vector<std::vector<T>> A, std::vector<T> b, std::vector<T> cost)
      : rows_(A.size()), cols_(cost.size()), a_(std::move(A)), b_(std::move(b)), cost_(std::move(cost)) {
    for (std::size_t r = 0; r < rows_; ++r)
      if (b_[r] < T(0)) {
        for (auto& v : a_[r]) v = -v;
        b_[r] = -b_[r];
      }
  }

  LPResult<T> solve() {
    const T tol = lp_field<T>::tol();
    // Phase 1: artificial basis, minimize their sum.
    basis_.resize(rows_);
    std::size_t total = cols_ + rows_;
    for (std::size_t r = 0; r < rows_; ++r) {
      a_[r].resize(total, T(0));
      a_[r][cols_ + r] = T(1);
      basis_[r] = static_cast<int>(cols_ + r);
    }
    // Artificial columns keep reduced cost 0: they are basic with unit cost.
    red_.assign(total, T(0));
    obj_ = T(0);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t j = 0; j < cols_; ++j) red_[j] -= a_[r][j];
      obj_ -= b_[r];
    }
    if (!iterate(total)) throw std::runtime_error("simplex: iteration cap in phase 1");
    LPResult<T> res;
    if (-obj_ > tol) {
      res.status = LPStatus::infeasible;
      return res;
    }
    purge_artificials(tol);

    // Phase 2 on structural columns only.
    red_.assign(cols_, T(0));
    for (std::size_t j = 0; j < cols_; ++j) red_[j] = cost_[j];
    obj_ = T(0);
    for (std::size_t r = 0; r < rows_; ++r) {
      int bj = basis_[r];
      if (bj < 0 || static_cast<std::size_t>(bj) >= cols_) continue;
      T cb = cost_[bj];
      if (cb == T(0)) continue;
      for (std::size_t j = 0; j < cols_; ++j) red_[j] -= cb * a_[r][j];
      obj_ -= cb * b_[r];
    }
    if (!iterate(cols_)) throw std::runtime_error("simplex: iteration cap in phase 2");
    if (unbounded_) {
      res.status = LPStatus::unbounded;
      return res;
    }
    res.status = LPStatus::optimal;
    res.x.assign(cols_, T(0));
    for (std::size_t r = 0; r < rows_; ++r)
      if (basis_[r] >= 0 && static_cast<std::size_t>(basis_[r]) < cols_) res.x[basis_[r]] = b_[r];
    res.objective = -obj_;
    return res;
  }

 private:
  bool iterate(std::size_t ncols) {
    const T tol = lp_field<T>::tol();
    unbounded_ = false;
    std::size_t cap = 2000 + 60 * (rows_ + ncols);
    for (std::size_t it = 0; it < cap; ++it) {
      // Bland: smallest improving column.
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < ncols; ++j)
        if (red_[j] < -tol) {
          enter = j;
          break;
        }
      if (enter == ncols) return true;
      std::size_t leave = rows_;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (a_[r][enter] <= tol) continue;
        if (leave == rows_) {
          leave = r;
          continue;
        }
        T lhs = b_[r] * a_[leave][enter];
        T rhs = b_[leave] * a_[r][enter];
        if (lhs < rhs || (lhs == rhs && basis_[r] < basis_[leave])) leave = r;
      }
      if (leave == rows_) {
        unbounded_ = true;
        return true;
      }
      pivot(leave, enter, ncols);
    }
    return false;
  }

  void pivot(std::size_t r, std::size_t c, std::size_t ncols) {
    T p = a_[r][c];
    for (std::size_t j = 0; j < ncols; ++j) a_[r][j] = a_[r][j] / p;
    b_[r] = b_[r] / p;
    a_[r][c] = T(1);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      T f = a_[i][c];
      if (f == T(0)) continue;
      for (std::size_t j = 0; j < ncols; ++j) a_[i][j] -= f * a_[r][j];
      a_[i][c] = T(0);
      b_[i] -= f * b_[r];
    }
    T f = red_[c];
    if (f != T(0)) {
      for (std::size_t j = 0; j < ncols; ++j) red_[j] -= f * a_[r][j];
      red_[c] = T(0);
      obj_ -= f * b_[r];
    }
    basis_[r] = static_cast<int>(c);
  }

  // Swap artificial columns out of the basis; rows where no structural pivot
  // exists are redundant and removed.
  void purge_artificials(const T& tol) {
    for (std::size_t r = 0; r < rows_;) {
      if (basis_[r] >= 0 && static_cast<std::size_t>(basis_[r]) < cols_) {
        ++r;
        continue;
      }
      std::size_t c = cols_;
      for (std::size_t j = 0; j < cols_; ++j)
        if (a_[r][j] > tol || a_[r][j] < -tol) {
          c = j;
          break;
        }
      if (c < cols_) {
        std::size_t total = cols_ + rows_;
        pivot(r, c, total);
        ++r;
      } else {
        std::size_t last = rows_ - 1;
        std::swap(a_[r], a_[last]);
        std::swap(b_[r], b_[last]);
        std::swap(basis_[r], basis_[last]);
        a_.pop_back();
        b_.pop_back();
        basis_.pop_back();
        rows_ = last;
      }
    }
  }

  std::size_t rows_, cols_;
  std::vector<std::vector<T>> a_;
  std::vector<T> b_;
  std::vector<T> cost_;
  std::vector<T> red_;
  std::vector<int> basis_;
  T obj_{};
  bool unbounded_ = false;
};

template <class T>
LPResult<T> solve_lp(std::vector<std::vector<T>> A, std::vector<T> b, std::vector<T> cost) {
  SimplexTableau<T> tab(std::move(A), std::move(b), std::move(cost));
  return tab.solve();
}

}  // namespace bl
