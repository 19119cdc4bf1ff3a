#pragma once

#include "bl/minors.hpp"

namespace bl {

// Finest partition N_m = sqcup K_j with R^n the direct sum of the spans E_j.
// Blocks are listed by smallest member; indices inside a block ascend.
struct AdaptedPartition {
  std::vector<std::vector<int>> blocks;
  std::vector<MatrixXd> block_bases;  // orthonormal basis of each span, n x r_j
  std::vector<bool> irreducible;      // true for every block of the finest partition
  // log det(S)^2 for S = [Q_1 | ... | Q_r]; 0 exactly when the spans are
  // mutually orthogonal. Product-of-block-constants relations carry this
  // factor for oblique sums.
  double log_obliquity = 0.0;
};

AdaptedPartition decompose(const RankOneDatum& d, const MinorTable& table);

// Sub-datum per block, vectors in the block's orthonormal basis coordinates.
std::vector<RankOneDatum> split(const RankOneDatum& d, const AdaptedPartition& p);

enum class Feasibility { relative_interior, boundary, infeasible };

struct FeasibilityCertificate {
  Feasibility status = Feasibility::infeasible;
  // Admissible subsets (d_I != 0) in table order and their weights solving
  //   max epsilon  s.t.  c = sum t_I 1_I, t_I >= epsilon.
  std::vector<std::uint64_t> admissible;
  std::vector<double> weights;
  double epsilon = 0.0;
  // Separating functional for infeasible c: <x,c> < min over admissible I of
  // <x, 1_I>. Empty when feasible or when no separator was produced.
  std::vector<double> separator;
  double separator_gap = 0.0;
  // Exact re-verification of the verdict (run for m <= 12); true when the
  // rational program reproduces the status.
  bool exact_verified = false;
};

// status == relative_interior iff c lies in the relative interior of
// conv{1_I : d_I != 0}, which is equivalent to the constant being achieved.
FeasibilityCertificate feasibility(const RankOneDatum& d, const MinorTable& table,
                                   double tol = 1e-9);

struct AchievementCertificate {
  bool certified = false;
  std::vector<double> weights;  // t_I over admissible subsets, sums to 1
  double max_error = 0.0;       // max_i |sum_{I ni i} t_I - c_i|
};

// Stationarity of lambda for the datum's constant: t_I proportional to
// d_I prod_{i in I} (c_i lambda_i); certified when sum_{I ni i} t_I
// reproduces every c_i within tol.
AchievementCertificate achievement_certificate(const RankOneDatum& d, const MinorTable& table,
                                               const VectorXd& lambda, double tol = 1e-7);

// Raw-weight variant used by the generalized Young program: t_I proportional
// to d_I prod_{i in I} lambda_i, target exponents `target`.
AchievementCertificate stationarity_certificate(const MinorTable& table, const VectorXd& lambda,
                                                const VectorXd& target, double tol = 1e-7);

}  // namespace bl
