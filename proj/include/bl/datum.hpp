#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace bl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Rank-one datum: m vectors v_i spanning R^n and exponents c_i > 0 with
// sum c_i = n. Column i of `vectors` is v_i.
struct RankOneDatum {
  int n = 0;
  MatrixXd vectors;  // n x m
  VectorXd c;        // m

  int m() const { return static_cast<int>(vectors.cols()); }
  VectorXd vector(int i) const { return vectors.col(i); }
};

// General datum: surjective maps B_i: R^n -> R^{n_i} with sum c_i n_i = n
// and trivial common kernel.
struct MultiDatum {
  struct Block {
    MatrixXd B;  // n_i x n
    double c = 0.0;
  };
  int n = 0;
  std::vector<Block> blocks;

  int m() const { return static_cast<int>(blocks.size()); }
};

// Direction of the functional inequality a computation refers to: J <= F
// against the product of masses, or I >= E.
enum class Side { BL, RBL };

struct Violation {
  std::string name;    // "homogeneity", "span", ...
  std::string detail;  // offending indices and magnitudes
};

using ValidationReport = std::vector<Violation>;

// Empty report means valid. Tolerances: homogeneity 1e-12, rank decisions at
// singular values below 1e-10 * largest.
ValidationReport validate(const RankOneDatum& d);
ValidationReport validate(const MultiDatum& d);

// Rank-one datum as 1-dimensional blocks B_i = v_i^T. The Gaussian constant
// of the result equals the rank-one constant of `d`.
MultiDatum as_blocks(const RankOneDatum& d);

inline bool is_valid(const ValidationReport& r) { return r.empty(); }

}  // namespace bl
