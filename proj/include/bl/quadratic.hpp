#pragma once

#include "bl/datum.hpp"

namespace bl {

// Aggregate form Q = sum_i c_i B_i^T A_i B_i of SPD blocks A_i.
MatrixXd aggregate_quadratic(const MultiDatum& d, const std::vector<MatrixXd>& A);

// J(G_{A_i}) / prod (integral G_{A_i})^{c_i}
//   = ( det(sum c_i B_i^T A_i B_i) / prod det(A_i)^{c_i} )^{-1/2}
// for centered Gaussians G_A(x) = exp(-<Ax,x>). Throws std::invalid_argument
// when some A_i is not SPD and std::domain_error when the aggregate form is
// numerically singular.
double gaussian_J_value(const MultiDatum& d, const std::vector<MatrixXd>& A);

// Matrix of the dual form R = Q^*, built from the variational definition
//   R(x) = inf { sum c_i <A_i^{-1} x_i, x_i> : x = sum c_i B_i^T x_i }
// by solving the KKT system of each infimum, not from inverting Q. Feeding
// both routes into dual_quadratic_check keeps them independent.
MatrixXd dual_quadratic_matrix(const MultiDatum& d, const std::vector<MatrixXd>& A);

// Product of the J-ratio at (A_i) and the I-ratio at (A_i^{-1}); equals 1
// for every datum and SPD tuple.
double dual_quadratic_check(const MultiDatum& d, const std::vector<MatrixXd>& A);

}  // namespace bl
