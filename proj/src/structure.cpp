#include "bl/structure.hpp"

#include <Eigen/QR>
#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "bl/simplex.hpp"

namespace bl {
namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

using rational = boost::multiprecision::cpp_rational;

// Weight LP shared by the float pass and the exact fallback:
//   max eps  s.t.  sum_I s_I 1_I + eps * k = c,  s_I >= 0,  eps free,
// with k_i the number of admissible subsets containing i; t_I = s_I + eps.
template <class T>
LPResult<T> weight_lp(const MinorTable& table, const std::vector<std::uint64_t>& adm,
                      const std::vector<T>& c) {
  int m = table.m;
  std::size_t nsub = adm.size();
  std::vector<std::vector<T>> A(m, std::vector<T>(nsub + 2, T(0)));
  std::vector<T> k(m, T(0));
  for (std::size_t s = 0; s < nsub; ++s) {
    const int* I = table.subset(adm[s]);
    for (int j = 0; j < table.n; ++j) {
      A[I[j]][s] = T(1);
      k[I[j]] += T(1);
    }
  }
  for (int i = 0; i < m; ++i) {
    A[i][nsub] = k[i];
    A[i][nsub + 1] = -k[i];
  }
  std::vector<T> cost(nsub + 2, T(0));
  cost[nsub] = T(-1);
  cost[nsub + 1] = T(1);
  return solve_lp<T>(std::move(A), c, std::move(cost));
}

// Separator LP: max delta s.t. <x, 1_I - c> >= delta over admissible I,
// |x_j| <= 1. Variables x = p - q, delta = dp - dm, plus one slack per row.
LPResult<double> separator_lp(const MinorTable& table, const std::vector<std::uint64_t>& adm,
                              const VectorXd& c) {
  int m = table.m;
  std::size_t nsub = adm.size();
  std::size_t rows = nsub + 2 * static_cast<std::size_t>(m);
  std::size_t free_vars = 2 * m + 2;
  std::size_t cols = free_vars + rows;
  std::vector<std::vector<double>> A(rows, std::vector<double>(cols, 0.0));
  std::vector<double> b(rows, 0.0);
  for (std::size_t s = 0; s < nsub; ++s) {
    const int* I = table.subset(adm[s]);
    VectorXd row = -c;
    for (int j = 0; j < table.n; ++j) row[I[j]] += 1.0;
    for (int i = 0; i < m; ++i) {
      A[s][i] = row[i];
      A[s][m + i] = -row[i];
    }
    A[s][2 * m] = -1.0;
    A[s][2 * m + 1] = 1.0;
    A[s][free_vars + s] = -1.0;  // surplus
  }
  for (int i = 0; i < m; ++i) {
    std::size_t r0 = nsub + 2 * i, r1 = r0 + 1;
    A[r0][i] = 1.0;
    A[r0][m + i] = -1.0;
    A[r0][free_vars + r0] = 1.0;  // x_i <= 1
    b[r0] = 1.0;
    A[r1][i] = -1.0;
    A[r1][m + i] = 1.0;
    A[r1][free_vars + r1] = 1.0;  // -x_i <= 1
    b[r1] = 1.0;
  }
  std::vector<double> cost(cols, 0.0);
  cost[2 * m] = -1.0;
  cost[2 * m + 1] = 1.0;
  return solve_lp<double>(std::move(A), std::move(b), std::move(cost));
}

}  // namespace

AdaptedPartition decompose(const RankOneDatum& d, const MinorTable& table) {
  int n = d.n, m = d.m();
  UnionFind uf(m);
  // i and j are related iff some (n-1)-subset K completes both to a basis,
  // i.e. d_{K+i} != 0 and d_{K+j} != 0. Scan all K once.
  std::vector<int> kcomb(std::max(n - 1, 0));
  std::vector<int> full(n);
  std::vector<int> hits;
  bool more = n >= 1;
  if (n == 1) {
    // K is empty; every pair of nonzero vectors is related.
    hits.clear();
    for (int i = 0; i < m; ++i)
      if (table.minors[i] != 0.0) hits.push_back(i);
    for (std::size_t a = 1; a < hits.size(); ++a) uf.unite(hits[0], hits[a]);
  } else {
    for (int j = 0; j < n - 1; ++j) kcomb[j] = j;
    while (more) {
      hits.clear();
      for (int i = 0; i < m; ++i) {
        bool in_k = std::binary_search(kcomb.begin(), kcomb.end(), i);
        if (in_k) continue;
        std::merge(kcomb.begin(), kcomb.end(), &i, &i + 1, full.begin());
        if (table.minor_of(full.data()) != 0.0) hits.push_back(i);
      }
      for (std::size_t a = 1; a < hits.size(); ++a) uf.unite(hits[0], hits[a]);
      more = combination_next(kcomb.data(), n - 1, m);
    }
  }

  AdaptedPartition p;
  std::vector<int> root_block(m, -1);
  for (int i = 0; i < m; ++i) {
    int r = uf.find(i);
    if (root_block[r] < 0) {
      root_block[r] = static_cast<int>(p.blocks.size());
      p.blocks.emplace_back();
    }
    p.blocks[root_block[r]].push_back(i);
  }
  int dim_total = 0;
  MatrixXd stacked(n, n);
  for (const auto& blk : p.blocks) {
    MatrixXd cols(n, blk.size());
    for (std::size_t a = 0; a < blk.size(); ++a) cols.col(a) = d.vectors.col(blk[a]);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(cols);
    qr.setThreshold(1e-10);
    int r = static_cast<int>(qr.rank());
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, r);
    p.block_bases.push_back(q);
    p.irreducible.push_back(true);
    stacked.middleCols(dim_total, r) = q;
    dim_total += r;
  }
  if (dim_total == n) {
    double det = stacked.partialPivLu().determinant();
    p.log_obliquity = std::log(det * det);
    if (p.blocks.size() == 1) p.log_obliquity = 0.0;
  }
  p.irreducible.assign(p.blocks.size(), true);
  return p;
}

std::vector<RankOneDatum> split(const RankOneDatum& d, const AdaptedPartition& p) {
  std::vector<RankOneDatum> out;
  out.reserve(p.blocks.size());
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& blk = p.blocks[b];
    const MatrixXd& q = p.block_bases[b];
    RankOneDatum sub;
    sub.n = static_cast<int>(q.cols());
    sub.vectors.resize(sub.n, blk.size());
    sub.c.resize(blk.size());
    for (std::size_t a = 0; a < blk.size(); ++a) {
      sub.vectors.col(a) = q.transpose() * d.vectors.col(blk[a]);
      sub.c[a] = d.c[blk[a]];
    }
    out.push_back(std::move(sub));
  }
  return out;
}

FeasibilityCertificate feasibility(const RankOneDatum& d, const MinorTable& table, double tol) {
  FeasibilityCertificate cert;
  for (std::uint64_t k = 0; k < table.count(); ++k)
    if (table.minors[k] != 0.0) cert.admissible.push_back(k);
  if (cert.admissible.empty()) return cert;

  int m = table.m;
  std::vector<double> c(m);
  for (int i = 0; i < m; ++i) c[i] = d.c[i];
  auto lp = weight_lp<double>(table, cert.admissible, c);
  std::size_t nsub = cert.admissible.size();
  if (lp.status == LPStatus::optimal) {
    cert.epsilon = -lp.objective;  // cost was -eps
    if (cert.epsilon > tol) {
      cert.status = Feasibility::relative_interior;
    } else if (cert.epsilon >= -tol) {
      cert.status = Feasibility::boundary;
    } else {
      cert.status = Feasibility::infeasible;
    }
    if (cert.status != Feasibility::infeasible) {
      cert.weights.resize(nsub);
      for (std::size_t s = 0; s < nsub; ++s) cert.weights[s] = lp.x[s] + cert.epsilon;
    }
  } else {
    cert.status = Feasibility::infeasible;
  }

  if (cert.status == Feasibility::infeasible && cert.admissible.size() <= 200000) {
    auto sep = separator_lp(table, cert.admissible, d.c);
    if (sep.status == LPStatus::optimal && -sep.objective > tol) {
      cert.separator.resize(m);
      for (int i = 0; i < m; ++i) cert.separator[i] = sep.x[i] - sep.x[m + i];
      cert.separator_gap = -sep.objective;
    }
  }

  // Exact rational re-verification of the dichotomy; doubles convert exactly.
  if (m <= 12) {
    std::vector<rational> cr(m);
    for (int i = 0; i < m; ++i) cr[i] = rational(d.c[i]);
    auto exact = weight_lp<rational>(table, cert.admissible, cr);
    Feasibility exact_status = Feasibility::infeasible;
    if (exact.status == LPStatus::optimal) {
      rational eps = -exact.objective;
      if (eps > 0)
        exact_status = Feasibility::relative_interior;
      else if (eps == 0)
        exact_status = Feasibility::boundary;
    }
    cert.exact_verified = exact_status == cert.status;
  }
  return cert;
}

AchievementCertificate stationarity_certificate(const MinorTable& table, const VectorXd& lambda,
                                                const VectorXd& target, double tol) {
  AchievementCertificate cert;
  int m = table.m;
  VectorXd x = lambda.array().log();
  double logz = log_weighted_gram_det(table, x);
  VectorXd margin = VectorXd::Zero(m);
  std::vector<double> weights;
  weights.reserve(table.count());
  for (std::uint64_t k = 0; k < table.count(); ++k) {
    if (table.minors[k] == 0.0) continue;
    const int* I = table.subset(k);
    double e = std::log(table.minors[k]);
    for (int j = 0; j < table.n; ++j) e += x[I[j]];
    double t = std::exp(e - logz);
    weights.push_back(t);
    for (int j = 0; j < table.n; ++j) margin[I[j]] += t;
  }
  cert.weights = std::move(weights);
  cert.max_error = (margin - target).cwiseAbs().maxCoeff();
  cert.certified = cert.max_error <= tol;
  return cert;
}

AchievementCertificate achievement_certificate(const RankOneDatum& d, const MinorTable& table,
                                               const VectorXd& lambda, double tol) {
  VectorXd eff = lambda.cwiseProduct(d.c);
  return stationarity_certificate(table, eff, d.c, tol);
}

}  // namespace bl
