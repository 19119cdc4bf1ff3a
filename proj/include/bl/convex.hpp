#pragma once

#include <cstdint>
#include <vector>

#include "bl/datum.hpp"
#include "bl/functional.hpp"

namespace bl {

// Unit directions u_i with weights c_i satisfying sum c_i u_i u_i^T = I_n.
struct BallDecomposition {
  MatrixXd u;  // n x m, unit columns
  VectorXd c;
  int n() const { return static_cast<int>(u.rows()); }
  int m() const { return static_cast<int>(u.cols()); }
};

// Frobenius norm of sum c_i u_i u_i^T - I.
double ball_residual(const BallDecomposition& b);

ValidationReport validate(const BallDecomposition& b);

RankOneDatum ball_datum(const BallDecomposition& b);

// m x m orthogonal matrix whose first n rows are the columns sqrt(c_i) u_i.
MatrixXd orthonormal_lift(const BallDecomposition& b);

BallDecomposition random_ball_decomposition(int n, int m, std::uint64_t seed);

// Minkowski sum of segments alpha_i [-u_i, u_i].
struct Zonotope {
  MatrixXd u;  // n x m, unit columns
  VectorXd alpha;
  int n() const { return static_cast<int>(u.rows()); }
  int m() const { return static_cast<int>(u.cols()); }
};

double zonotope_volume(const Zonotope& z);
double zonotope_volume_serial(const Zonotope& z);

struct McVolume {
  double value = 0.0;
  double sigma = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
};

McVolume zonotope_volume_mc(const Zonotope& z, std::uint64_t samples, std::uint64_t seed);

struct ZonoidReport {
  double volume = 0.0;
  double bound = 0.0;
  bool pass = false;
};

// volume(sum alpha_i [-u_i,u_i]) >= 2^n prod (alpha_i/c_i)^{c_i}.
ZonoidReport zonoid_bound_check(const BallDecomposition& b, const VectorXd& alpha);

// Same volume through the sup-convolution integral of interval indicators.
IntegralEstimate zonotope_volume_functional(const BallDecomposition& b, const VectorXd& alpha,
                                            const FunctionalOptions& opts = {});

struct ProjectionReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double error = 0.0;
  double residual = 0.0;
  bool pass = false;
};

// vol(sum c_i K_i) >= prod vol(K_i)^{c_i} when sum c_i Q_i Q_i^T = I.
// bodies[i] is an indicator sampled on the range of Q_i^T.
ProjectionReport bm_projection_check(const std::vector<MatrixXd>& q, const VectorXd& c,
                                     const std::vector<GridFunction>& bodies,
                                     const FunctionalOptions& opts = {});

}  // namespace bl
