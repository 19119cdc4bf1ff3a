#pragma once

#include <optional>
#include <string>

#include "bl/grid.hpp"
#include "bl/structure.hpp"

namespace bl {

struct GaussianOptimum {
  VectorXd lambda;               // rank-one Gaussian scalars A_i
  std::vector<MatrixXd> blocks;  // SPD blocks A_i for the general program
  double D = 0.0;
  double E = 0.0;
  double F = std::numeric_limits<double>::infinity();
  bool converged = false;  // stationary point within tolerance
  bool achieved = true;    // false when iterates diverge (infimum not attained)
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::string note;
};

struct MinimizeOptions {
  double tol = 1e-8;
  int max_iter = 500;
  double divergence = 60.0;  // |x_i| beyond this is a non-achievement verdict
  std::uint64_t seed = 0;
  bool randomize_start = false;
  bool check_feasibility = true;
  const FeasibilityCertificate* feasibility = nullptr;  // reuse when already computed
};

// Gaussian constant of the rank-one datum:
//   D = inf over a_i > 0 of det(sum_i c_i a_i v_i v_i^T) / prod a_i^{c_i},
// found by Newton descent of the convex log-sum-exp form on the quotient by
// its lineality space. E = sqrt(D), F = 1/sqrt(D).
GaussianOptimum minimize(const RankOneDatum& d, const MinorTable& table, const VectorXd& c,
                         const MinimizeOptions& opts = {});

// Raw-weight infimum inf det(sum lambda_i v_i v_i^T) / prod lambda_i^{c_i};
// differs from the datum constant by prod c_i^{c_i}.
GaussianOptimum determinant_infimum(const RankOneDatum& d, const MinorTable& table,
                                    const VectorXd& c, const MinimizeOptions& opts = {});

// Gaussian constant of a general datum over SPD blocks, parametrized by
// Cholesky factors with exponential diagonal. Analytic gradient, finite
// difference Hessian, Levenberg damping.
GaussianOptimum minimize_block(const MultiDatum& d, const MinimizeOptions& opts = {});

// True when the two lambda vectors agree up to one scalar factor r taking the
// first run to the second (relative spread of ratios within tol); r is the
// geometric mean of b.lambda[i] / a.lambda[i].
std::pair<bool, double> uniqueness_check(const GaussianOptimum& a, const GaussianOptimum& b,
                                         double tol = 1e-6);

struct ExtremizerParams {
  double a = 1.0;          // common dilation
  VectorXd y;              // BL: centers <y, v_i>/a  (empty = centered)
  VectorXd t;              // RBL: centers t_i/a (empty = centered)
};

// Extremal Gaussian tuples at the converged rank-one optimum: BL maximizers
// h_i(t) = exp(-lambda_i (a t - <y,v_i>)^2), RBL minimizers
// h_i(t) = exp(-(a t - t_i)^2 / lambda_i).
std::vector<GaussianDescriptor> extremizer_family(const RankOneDatum& d, const GaussianOptimum& opt,
                                                  Side side, const ExtremizerParams& params = {});

struct YoungResult {
  RankOneDatum datum;  // vectors w_i with exponents r'/p'_i
  MinorTable table;
  FeasibilityCertificate feasibility;
  GaussianOptimum opt;  // D is the sharp constant for (r, p)
  AchievementCertificate certificate;
};

// Sharp constant of the generalized Young inequality attached to an
// orthogonal m x m matrix V: w_i = last (m-n) coordinates of row i, exponents
// r'/p'_i, raw determinant infimum. Throws std::invalid_argument when V is
// not orthogonal (1e-10) or the scaling identity sum 1/p_i = n + (m-n)/r
// fails (1e-10).
YoungResult young_constant(const MatrixXd& V, int n, double r, const VectorXd& p,
                           const MinimizeOptions& opts = {});

}  // namespace bl
