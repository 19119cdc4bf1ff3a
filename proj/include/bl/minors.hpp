#pragma once

#include <cstdint>
#include <optional>

#include "bl/common.hpp"
#include "bl/datum.hpp"

namespace bl {

// Table of squared n x n minors d_I over all n-subsets I of the m columns,
// in lexicographic subset order. Squared determinants below `clamp` are
// stored as exactly 0; the zero pattern drives feasibility and decomposition.
struct MinorTable {
  int n = 0;
  int m = 0;
  double clamp = 1e-14;
  std::vector<int> subsets;  // count * n, row k = k-th subset ascending
  VectorXd minors;           // count, d_I = det((v_i)_{i in I})^2

  std::uint64_t count() const { return minors.size(); }
  const int* subset(std::uint64_t k) const { return subsets.data() + k * n; }
  double minor_of(const int* comb) const {
    return minors[combination_rank(comb, n, m)];
  }
};

struct MinorOptions {
  std::uint64_t cap = 2'000'000;  // largest C(m,n) enumerated
  double clamp = 1e-14;
  bool parallel = true;
};

// Throws subset_cap_error when C(m,n) exceeds the cap.
MinorTable minor_table(const RankOneDatum& d, const MinorOptions& opts = {});

// sum_I lambda_I d_I with lambda_I = prod_{i in I} lambda_i. Equals
// det(sum_i lambda_i v_i v_i^T) by Cauchy-Binet. Accumulation switches to
// the log-domain path when any lambda_i leaves [1e-100, 1e100].
double weighted_gram_det(const MinorTable& table, const VectorXd& lambda);

// log sum_I d_I exp(sum_{i in I} x_i) with an optional per-index shift
// (shift_i added to x_i; minimize uses shift = log c). Max-stabilized;
// returns -inf when every admissible term vanishes.
double log_weighted_gram_det(const MinorTable& table, const VectorXd& x,
                             const VectorXd* shift = nullptr);

// Softmax marginal p_i = sum_{I ni i} w_I with w_I proportional to
// d_I exp(<x + shift, 1_I>); the gradient of log_weighted_gram_det at x.
VectorXd subset_mass(const MinorTable& table, const VectorXd& x, const VectorXd* shift = nullptr);

// Serial reference for the enumeration kernel; the parallel path must match
// it exactly.
MinorTable minor_table_serial(const RankOneDatum& d, const MinorOptions& opts = {});

}  // namespace bl
