#include "bl/datum.hpp"

#include <Eigen/SVD>
#include <sstream>

namespace bl {
namespace {

std::string fmt_index(int i) {
  std::ostringstream os;
  os << "i=" << (i + 1);
  return os.str();
}

int numeric_rank(const MatrixXd& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  double top = s.size() ? s[0] : 0.0;
  int r = 0;
  for (int k = 0; k < s.size(); ++k)
    if (s[k] > 1e-10 * top) ++r;
  return r;
}

}  // namespace

ValidationReport validate(const RankOneDatum& d) {
  ValidationReport rep;
  int m = d.m();
  if (d.n < 1 || m < d.n) {
    std::ostringstream os;
    os << "need m >= n >= 1, got n=" << d.n << " m=" << m;
    rep.push_back({"size", os.str()});
    return rep;
  }
  if (d.vectors.rows() != d.n)
    rep.push_back({"size", "vector length differs from n"});
  if (d.c.size() != m)
    rep.push_back({"size", "exponent count differs from m"});
  if (!rep.empty()) return rep;
  for (int i = 0; i < m; ++i) {
    if (d.vectors.col(i).norm() == 0.0)
      rep.push_back({"nonzero", "zero vector at " + fmt_index(i)});
    if (!(d.c[i] > 0.0))
      rep.push_back({"positive_exponent", "c <= 0 at " + fmt_index(i)});
  }
  double total = d.c.sum();
  if (std::abs(total - d.n) > 1e-12) {
    std::ostringstream os;
    os << "sum c_i = " << total << ", expected " << d.n;
    rep.push_back({"homogeneity", os.str()});
  }
  if (numeric_rank(d.vectors) < d.n)
    rep.push_back({"span", "vectors do not span R^n"});
  return rep;
}

ValidationReport validate(const MultiDatum& d) {
  ValidationReport rep;
  int m = d.m();
  if (d.n < 1 || m < 1) {
    rep.push_back({"size", "need n >= 1 and at least one block"});
    return rep;
  }
  double weighted_dim = 0.0;
  int stacked_rows = 0;
  for (int i = 0; i < m; ++i) {
    const auto& blk = d.blocks[i];
    if (blk.B.cols() != d.n) {
      rep.push_back({"size", "block domain differs from n at " + fmt_index(i)});
      return rep;
    }
    if (blk.B.rows() < 1 || blk.B.rows() > d.n)
      rep.push_back({"size", "block range dimension out of [1,n] at " + fmt_index(i)});
    if (!(blk.c > 0.0))
      rep.push_back({"positive_exponent", "c <= 0 at " + fmt_index(i)});
    if (numeric_rank(blk.B) < blk.B.rows())
      rep.push_back({"surjective", "block not surjective at " + fmt_index(i)});
    weighted_dim += blk.c * blk.B.rows();
    stacked_rows += static_cast<int>(blk.B.rows());
  }
  if (std::abs(weighted_dim - d.n) > 1e-12) {
    std::ostringstream os;
    os << "sum c_i n_i = " << weighted_dim << ", expected " << d.n;
    rep.push_back({"homogeneity", os.str()});
  }
  MatrixXd stacked(stacked_rows, d.n);
  int row = 0;
  for (const auto& blk : d.blocks) {
    stacked.middleRows(row, blk.B.rows()) = blk.B;
    row += static_cast<int>(blk.B.rows());
  }
  if (numeric_rank(stacked) < d.n)
    rep.push_back({"kernel", "common kernel of the B_i is nontrivial"});
  return rep;
}

MultiDatum as_blocks(const RankOneDatum& d) {
  MultiDatum out;
  out.n = d.n;
  out.blocks.resize(d.m());
  for (int i = 0; i < d.m(); ++i) {
    out.blocks[i].B = d.vectors.col(i).transpose();
    out.blocks[i].c = d.c[i];
  }
  return out;
}

}  // namespace bl
