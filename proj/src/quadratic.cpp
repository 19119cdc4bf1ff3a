#include "bl/quadratic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace bl {
namespace {

// log det of an SPD matrix via Cholesky; throws when not SPD.
double spd_logdet(const MatrixXd& a, const char* what) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw std::invalid_argument(what);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

MatrixXd aggregate_quadratic(const MultiDatum& d, const std::vector<MatrixXd>& A) {
  MatrixXd q = MatrixXd::Zero(d.n, d.n);
  for (int i = 0; i < d.m(); ++i)
    q += d.blocks[i].c * d.blocks[i].B.transpose() * A[i] * d.blocks[i].B;
  return q;
}

double gaussian_J_value(const MultiDatum& d, const std::vector<MatrixXd>& A) {
  if (static_cast<int>(A.size()) != d.m())
    throw std::invalid_argument("gaussian_J_value: one SPD block per factor required");
  double log_prod = 0.0;
  for (int i = 0; i < d.m(); ++i)
    log_prod += d.blocks[i].c * spd_logdet(A[i], "gaussian_J_value: block not SPD");
  MatrixXd q = aggregate_quadratic(d, A);
  Eigen::LLT<MatrixXd> llt(q);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("gaussian_J_value: aggregate form numerically singular");
  double log_q = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  if (!std::isfinite(log_q))
    throw std::domain_error("gaussian_J_value: aggregate form numerically singular");
  return std::exp(-0.5 * (log_q - log_prod));
}

MatrixXd dual_quadratic_matrix(const MultiDatum& d, const std::vector<MatrixXd>& A) {
  int n = d.n, m = d.m();
  int total = 0;
  for (const auto& blk : d.blocks) total += static_cast<int>(blk.B.rows());
  // KKT system of inf { sum c_i <A_i^{-1> x_i, x_i> : sum c_i B_i^T x_i = x }:
  //   [ 2 diag(c_i A_i^{-1})   -C^T ] [x_*]   [0]
  //   [ C                       0   ] [y  ] = [x],  C = [c_1 B_1^T ... c_m B_m^T]
  MatrixXd kkt = MatrixXd::Zero(total + n, total + n);
  std::vector<MatrixXd> a_inv(m);
  int row = 0;
  for (int i = 0; i < m; ++i) {
    int ni = static_cast<int>(d.blocks[i].B.rows());
    a_inv[i] = A[i].llt().solve(MatrixXd::Identity(ni, ni));
    kkt.block(row, row, ni, ni) = 2.0 * d.blocks[i].c * a_inv[i];
    MatrixXd ct = d.blocks[i].c * d.blocks[i].B.transpose();  // n x ni
    kkt.block(row, total, ni, n) = -ct.transpose();
    kkt.block(total, row, n, ni) = ct;
    row += ni;
  }
  Eigen::PartialPivLU<MatrixXd> lu(kkt);
  MatrixXd r = MatrixXd::Zero(n, n);
  auto value_at = [&](const VectorXd& x) {
    VectorXd rhs = VectorXd::Zero(total + n);
    rhs.tail(n) = x;
    VectorXd sol = lu.solve(rhs);
    double val = 0.0;
    int at = 0;
    for (int i = 0; i < m; ++i) {
      int ni = static_cast<int>(d.blocks[i].B.rows());
      VectorXd xi = sol.segment(at, ni);
      val += d.blocks[i].c * xi.dot(a_inv[i] * xi);
      at += ni;
    }
    return val;
  };
  VectorXd diag(n);
  for (int k = 0; k < n; ++k) diag[k] = value_at(VectorXd::Unit(n, k));
  for (int k = 0; k < n; ++k) {
    r(k, k) = diag[k];
    for (int l = k + 1; l < n; ++l) {
      double both = value_at(VectorXd::Unit(n, k) + VectorXd::Unit(n, l));
      r(k, l) = r(l, k) = 0.5 * (both - diag[k] - diag[l]);
    }
  }
  return r;
}

double dual_quadratic_check(const MultiDatum& d, const std::vector<MatrixXd>& A) {
  double log_prod = 0.0;
  for (int i = 0; i < d.m(); ++i)
    log_prod += d.blocks[i].c * spd_logdet(A[i], "dual_quadratic_check: block not SPD");
  MatrixXd q = aggregate_quadratic(d, A);
  double log_q = spd_logdet(q, "dual_quadratic_check: aggregate form not SPD");
  MatrixXd r = dual_quadratic_matrix(d, A);
  double log_r = spd_logdet(r, "dual_quadratic_check: dual form not SPD");
  double j_ratio = std::exp(-0.5 * (log_q - log_prod));
  double i_ratio = std::exp(-0.5 * (log_r + log_prod));
  return j_ratio * i_ratio;
}

}  // namespace bl
