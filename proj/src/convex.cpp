#include "bl/convex.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "bl/common.hpp"
#include "bl/simplex.hpp"

namespace bl {
namespace {

double subset_term(const Zonotope& z, const int* comb, MatrixXd& scratch) {
  int n = z.n();
  double coef = 1.0;
  for (int k = 0; k < n; ++k) {
    scratch.col(k) = z.u.col(comb[k]);
    coef *= z.alpha[comb[k]];
  }
  double det = n == 1 ? scratch(0, 0) : scratch.partialPivLu().determinant();
  return coef * std::abs(det);
}

}  // namespace

double ball_residual(const BallDecomposition& b) {
  MatrixXd s = MatrixXd::Zero(b.n(), b.n());
  for (int i = 0; i < b.m(); ++i) s += b.c[i] * b.u.col(i) * b.u.col(i).transpose();
  return (s - MatrixXd::Identity(b.n(), b.n())).norm();
}

ValidationReport validate(const BallDecomposition& b) {
  ValidationReport rep;
  if (b.n() < 1 || b.m() < b.n() || b.c.size() != b.m()) {
    rep.push_back({"size", "need m >= n >= 1 and one weight per direction"});
    return rep;
  }
  for (int i = 0; i < b.m(); ++i) {
    if (std::abs(b.u.col(i).norm() - 1.0) > 1e-9)
      rep.push_back({"unit", "direction " + std::to_string(i) + " is not unit"});
    if (!(b.c[i] > 0.0)) rep.push_back({"positive_weight", "weight " + std::to_string(i)});
  }
  double res = ball_residual(b);
  if (res > 1e-8)
    rep.push_back({"resolution", "sum c_i u_i u_i^T - I has norm " + std::to_string(res)});
  return rep;
}

RankOneDatum ball_datum(const BallDecomposition& b) { return {b.n(), b.u, b.c}; }

MatrixXd orthonormal_lift(const BallDecomposition& b) {
  int n = b.n(), m = b.m();
  MatrixXd p(n, m);
  for (int i = 0; i < m; ++i) p.col(i) = std::sqrt(b.c[i]) * b.u.col(i);
  MatrixXd pt = p.transpose();
  Eigen::HouseholderQR<MatrixXd> qr(pt);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(m, m);
  MatrixXd lift(m, m);
  lift.topRows(n) = p;
  lift.bottomRows(m - n) = q.rightCols(m - n).transpose();
  return lift;
}

BallDecomposition random_ball_decomposition(int n, int m, std::uint64_t seed) {
  if (m < n || n < 1) throw std::invalid_argument("random_ball_decomposition: need m >= n >= 1");
  for (std::uint64_t attempt = 0;; ++attempt) {
    std::mt19937_64 rng(split_seed(seed, attempt));
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXd g(m, m);
    for (int r = 0; r < m; ++r)
      for (int col = 0; col < m; ++col) g(r, col) = gauss(rng);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(m, m);
    MatrixXd p = q.topRows(n);
    BallDecomposition b;
    b.u.resize(n, m);
    b.c.resize(m);
    bool ok = true;
    for (int i = 0; i < m; ++i) {
      double w = p.col(i).squaredNorm();
      if (w < 0.05) {
        ok = false;
        break;
      }
      b.c[i] = w;
      b.u.col(i) = p.col(i) / std::sqrt(w);
    }
    if (ok) return b;
  }
}

double zonotope_volume(const Zonotope& z) {
  int n = z.n(), m = z.m();
  std::uint64_t count = binomial(m, n);
  constexpr std::uint64_t chunk = 4096;
  std::uint64_t chunks = (count + chunk - 1) / chunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_index_for(chunks, [&](std::size_t b) {
    std::uint64_t begin = b * chunk, end = std::min(begin + chunk, count);
    std::vector<int> comb(n);
    combination_unrank(begin, n, m, comb.data());
    MatrixXd scratch(n, n);
    double acc = 0.0;
    for (std::uint64_t k = begin; k < end; ++k) {
      acc += subset_term(z, comb.data(), scratch);
      combination_next(comb.data(), n, m);
    }
    partial[b] = acc;
  });
  double sum = 0.0;
  for (double v : partial) sum += v;
  return std::ldexp(sum, n);
}

double zonotope_volume_serial(const Zonotope& z) {
  int n = z.n(), m = z.m();
  std::vector<int> comb(n);
  for (int k = 0; k < n; ++k) comb[k] = k;
  std::uint64_t count = binomial(m, n);
  MatrixXd scratch(n, n);
  double sum = 0.0;
  for (std::uint64_t k = 0; k < count; ++k) {
    sum += subset_term(z, comb.data(), scratch);
    combination_next(comb.data(), n, m);
  }
  return std::ldexp(sum, n);
}

namespace {

// Membership of x in {sum alpha_i t_i u_i : |t_i| <= 1}.
struct Membership {
  MatrixXd gen;  // n x m, columns alpha_i u_i
  MatrixXd inv;  // square case
  VectorXd kernel;
  MatrixXd pinv;  // corank-1 case, gen^T (gen gen^T)^{-1}
  int mode = 2;   // 0 square, 1 corank 1, 2 general

  explicit Membership(const Zonotope& z) {
    int n = z.n(), m = z.m();
    gen = z.u * z.alpha.asDiagonal();
    if (m == n) {
      mode = 0;
      inv = gen.inverse();
    } else if (m == n + 1) {
      mode = 1;
      Eigen::FullPivLU<MatrixXd> lu(gen);
      kernel = lu.kernel().col(0);
      pinv = gen.transpose() * (gen * gen.transpose()).inverse();
    }
  }

  bool contains(const VectorXd& x) const {
    constexpr double tol = 1e-9;
    if (mode == 0) {
      VectorXd t = inv * x;
      return t.lpNorm<Eigen::Infinity>() <= 1.0 + tol;
    }
    if (mode == 1) {
      VectorXd t0 = pinv * x;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (int i = 0; i < t0.size(); ++i) {
        double k = kernel[i];
        if (std::abs(k) < 1e-14) {
          if (std::abs(t0[i]) > 1.0 + tol) return false;
          continue;
        }
        double a = (-1.0 - t0[i]) / k, b = (1.0 - t0[i]) / k;
        lo = std::max(lo, std::min(a, b));
        hi = std::min(hi, std::max(a, b));
      }
      return lo <= hi + tol;
    }
    // Feasibility LP: t = p - q, |t_i| <= 1 via slack rows.
    int n = static_cast<int>(gen.rows()), m = static_cast<int>(gen.cols());
    int cols = 4 * m;
    std::vector<std::vector<double>> A(n + 2 * m, std::vector<double>(cols, 0.0));
    std::vector<double> b(n + 2 * m, 0.0);
    for (int r = 0; r < n; ++r) {
      for (int i = 0; i < m; ++i) {
        A[r][i] = gen(r, i);
        A[r][m + i] = -gen(r, i);
      }
      b[r] = x[r];
    }
    for (int i = 0; i < m; ++i) {
      A[n + 2 * i][i] = 1.0;
      A[n + 2 * i][m + i] = -1.0;
      A[n + 2 * i][2 * m + 2 * i] = 1.0;
      b[n + 2 * i] = 1.0;
      A[n + 2 * i + 1][i] = -1.0;
      A[n + 2 * i + 1][m + i] = 1.0;
      A[n + 2 * i + 1][2 * m + 2 * i + 1] = 1.0;
      b[n + 2 * i + 1] = 1.0;
    }
    std::vector<double> cost(cols, 0.0);
    return solve_lp<double>(A, b, cost).status == LPStatus::optimal;
  }
};

}  // namespace

McVolume zonotope_volume_mc(const Zonotope& z, std::uint64_t samples, std::uint64_t seed) {
  int n = z.n();
  Membership member(z);
  VectorXd half = member.gen.cwiseAbs().rowwise().sum();
  double box_vol = 1.0;
  for (int k = 0; k < n; ++k) box_vol *= 2.0 * half[k];
  std::uint64_t blocks = (samples + kReduceBlock - 1) / kReduceBlock;
  std::vector<std::uint64_t> partial(blocks, 0);
  parallel_index_for(blocks, [&](std::size_t b) {
    std::uint64_t begin = b * kReduceBlock, end = std::min(begin + kReduceBlock, samples);
    std::mt19937_64 rng(split_seed(seed, b));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    VectorXd x(n);
    std::uint64_t local = 0;
    for (std::uint64_t s = begin; s < end; ++s) {
      for (int k = 0; k < n; ++k) x[k] = half[k] * unif(rng);
      if (member.contains(x)) ++local;
    }
    partial[b] = local;
  });
  McVolume out;
  out.samples = samples;
  for (std::uint64_t v : partial) out.hits += v;
  double p = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.value = box_vol * p;
  out.sigma = box_vol * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return out;
}

ZonoidReport zonoid_bound_check(const BallDecomposition& b, const VectorXd& alpha) {
  if (alpha.size() != b.m()) throw std::invalid_argument("zonoid_bound_check: radius count");
  ZonoidReport rep;
  rep.volume = zonotope_volume({b.u, alpha});
  double logb = b.n() * std::log(2.0);
  for (int i = 0; i < b.m(); ++i) logb += b.c[i] * std::log(alpha[i] / b.c[i]);
  rep.bound = std::exp(logb);
  rep.pass = rep.volume >= rep.bound - 1e-9;
  return rep;
}

IntegralEstimate zonotope_volume_functional(const BallDecomposition& b, const VectorXd& alpha,
                                            const FunctionalOptions& opts) {
  MultiDatum d;
  d.n = b.n();
  std::vector<GridFunction> f;
  for (int i = 0; i < b.m(); ++i) {
    d.blocks.push_back({b.u.col(i).transpose(), b.c[i]});
    double r = alpha[i] / b.c[i];
    f.push_back(indicator_grid_1d(-r, r, opts.grid));
  }
  return eval_I(d, f, opts);
}

ProjectionReport bm_projection_check(const std::vector<MatrixXd>& q, const VectorXd& c,
                                     const std::vector<GridFunction>& bodies,
                                     const FunctionalOptions& opts) {
  if (q.empty() || c.size() != static_cast<int>(q.size()) || bodies.size() != q.size())
    throw std::invalid_argument("bm_projection_check: one frame, weight, body per factor");
  int n = static_cast<int>(q[0].rows());
  MatrixXd s = MatrixXd::Zero(n, n);
  MultiDatum d;
  d.n = n;
  for (std::size_t i = 0; i < q.size(); ++i) {
    s += c[i] * q[i] * q[i].transpose();
    d.blocks.push_back({q[i].transpose(), c[i]});
  }
  ProjectionReport rep;
  rep.residual = (s - MatrixXd::Identity(n, n)).norm();
  if (rep.residual > 1e-8) return rep;
  IntegralEstimate lhs = eval_I(d, bodies, opts);
  rep.lhs = lhs.value;
  rep.error = lhs.error;
  double logr = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) logr += c[i] * std::log(bodies[i].total_mass());
  rep.rhs = std::exp(logr);
  rep.pass = rep.lhs >= rep.rhs - (3.0 * rep.error + 1e-6 * (1.0 + std::abs(rep.rhs)));
  return rep;
}

}  // namespace bl
