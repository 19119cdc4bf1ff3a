#include "bl/optimize.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace bl {
namespace {

constexpr double kLogFloor = -690.0;  // exp underflows to 0 below this

struct LseTerms {
  double value = 0.0;   // log sum_I d_I e^{x_I + s_I}
  VectorXd grad;        // softmax mass per index
  MatrixXd pair_mass;   // sum over I containing {i,j} of the softmax weight
};

// One pass over admissible subsets: value, gradient, pair masses.
LseTerms lse_eval(const MinorTable& table, const VectorXd& z, bool want_pairs) {
  std::uint64_t count = table.count();
  int m = table.m;
  std::vector<double> expo(count, -std::numeric_limits<double>::infinity());
  parallel_index_for(count, [&](std::size_t k) {
    double dk = table.minors[k];
    if (dk <= 0.0) return;
    const int* I = table.subset(k);
    double s = std::log(dk);
    for (int j = 0; j < table.n; ++j) s += z[I[j]];
    expo[k] = s;
  });
  double top = -std::numeric_limits<double>::infinity();
  for (double e : expo) top = std::max(top, e);

  LseTerms out;
  out.grad = VectorXd::Zero(m);
  if (want_pairs) out.pair_mass = MatrixXd::Zero(m, m);
  if (!std::isfinite(top)) {
    out.value = -std::numeric_limits<double>::infinity();
    return out;
  }
  // Fixed-block partials keep the fold order independent of thread count.
  std::size_t nblocks = (count + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> psum(nblocks, 0.0);
  std::vector<VectorXd> pgrad(nblocks);
  std::vector<MatrixXd> ppair(want_pairs ? nblocks : 0);
  parallel_index_for(nblocks, [&](std::size_t b) {
    std::size_t lo = b * kReduceBlock;
    std::size_t hi = std::min<std::size_t>(count, lo + kReduceBlock);
    double s = 0.0;
    VectorXd g = VectorXd::Zero(m);
    MatrixXd pm;
    if (want_pairs) pm = MatrixXd::Zero(m, m);
    for (std::size_t k = lo; k < hi; ++k) {
      if (!std::isfinite(expo[k])) continue;
      double w = std::exp(expo[k] - top);
      s += w;
      const int* I = table.subset(k);
      for (int j = 0; j < table.n; ++j) {
        g[I[j]] += w;
        if (want_pairs)
          for (int l = 0; l < table.n; ++l) pm(I[j], I[l]) += w;
      }
    }
    psum[b] = s;
    pgrad[b] = std::move(g);
    if (want_pairs) ppair[b] = std::move(pm);
  });
  double total = 0.0;
  for (std::size_t b = 0; b < nblocks; ++b) {
    total += psum[b];
    out.grad += pgrad[b];
    if (want_pairs) out.pair_mass += ppair[b];
  }
  out.value = top + std::log(total);
  out.grad /= total;
  if (want_pairs) out.pair_mass /= total;
  return out;
}

// Orthonormal basis of span{1_I - 1_{I0}} over admissible subsets; the
// objective is strictly convex on this subspace and flat on its complement.
// Incremental Gram-Schmidt; the span saturates at dimension m-1.
MatrixXd effective_subspace(const MinorTable& table) {
  int m = table.m;
  MatrixXd basis(m, m - 1 > 0 ? m - 1 : 0);
  int rank = 0;
  VectorXd base = VectorXd::Zero(m);
  bool have_base = false;
  for (std::uint64_t k = 0; k < table.count() && rank < m - 1; ++k) {
    if (table.minors[k] == 0.0) continue;
    VectorXd ind = VectorXd::Zero(m);
    const int* I = table.subset(k);
    for (int j = 0; j < table.n; ++j) ind[I[j]] = 1.0;
    if (!have_base) {
      base = ind;
      have_base = true;
      continue;
    }
    VectorXd v = ind - base;
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < rank; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    double norm = v.norm();
    if (norm > 1e-10) basis.col(rank++) = v / norm;
  }
  return basis.leftCols(rank);
}

GaussianOptimum lse_minimize(const RankOneDatum& d, const MinorTable& table, const VectorXd& c,
                             const VectorXd& shift, const MinimizeOptions& opts) {
  GaussianOptimum out;
  int m = table.m;

  FeasibilityCertificate local;
  const FeasibilityCertificate* feas = opts.feasibility;
  if (!feas && opts.check_feasibility) {
    RankOneDatum probe = d;
    probe.c = c;
    local = feasibility(probe, table);
    feas = &local;
  }
  if (feas && feas->status == Feasibility::infeasible) {
    out.D = 0.0;
    out.E = 0.0;
    out.F = std::numeric_limits<double>::infinity();
    out.converged = true;
    out.achieved = false;
    out.lambda = VectorXd::Zero(m);
    out.note = "infeasible exponents: the infimum is 0";
    return out;
  }
  // On the boundary the descent converges in value with vanishing gradient,
  // but only along scalars escaping to 0 or infinity: the infimum is a limit.
  if (feas && feas->status == Feasibility::boundary) {
    out.achieved = false;
    out.note = "boundary exponents: the infimum is approached, not attained";
  }

  MatrixXd W = effective_subspace(table);
  int k = static_cast<int>(W.cols());
  VectorXd x = VectorXd::Zero(m);
  if (opts.randomize_start && k > 0) {
    std::mt19937_64 rng(split_seed(opts.seed, 0x5eed));
    std::normal_distribution<double> gauss(0.0, 1.0);
    VectorXd z0(k);
    for (int i = 0; i < k; ++i) z0[i] = gauss(rng);
    x = W * z0;
  }

  auto psi = [&](const VectorXd& xx) {
    VectorXd z = xx + shift;
    return lse_eval(table, z, false).value - c.dot(xx);
  };

  double fx = psi(x);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    LseTerms terms = lse_eval(table, x + shift, true);
    VectorXd grad_full = terms.grad - c;
    residual = grad_full.lpNorm<Eigen::Infinity>();
    if (residual <= opts.tol) {
      out.converged = true;
      break;
    }
    if (x.lpNorm<Eigen::Infinity>() > opts.divergence) {
      out.achieved = false;
      if (out.note.empty()) out.note = "iterates diverge: the infimum is not attained";
      break;
    }
    if (k == 0) break;  // flat objective, nothing to move
    MatrixXd hess = terms.pair_mass - terms.grad * terms.grad.transpose();
    MatrixXd hz = W.transpose() * hess * W;
    VectorXd gz = W.transpose() * grad_full;
    VectorXd step;
    double mu = 0.0;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::LLT<MatrixXd> llt(hz + mu * MatrixXd::Identity(k, k));
      if (llt.info() == Eigen::Success) {
        step = W * llt.solve(-gz);
        if (step.dot(grad_full) < 0.0) break;
      }
      mu = mu == 0.0 ? 1e-10 : mu * 100.0;
      step.resize(0);
    }
    if (step.size() == 0) step = -(W * gz);  // gradient fallback
    double t = 1.0;
    double slope = step.dot(grad_full);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      double ft = psi(x + t * step);
      if (ft <= fx + 1e-4 * t * slope) {
        x += t * step;
        fx = ft;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      if (out.note.empty()) out.note = "line search stalled";
      break;
    }
    if (fx < kLogFloor) {  // objective sinking to -inf: infimum 0
      out.achieved = false;
      if (out.note.empty()) out.note = "objective unbounded below";
      break;
    }
  }
  out.iterations = it;
  out.residual = residual;
  out.lambda = x.array().exp();
  out.D = std::exp(fx);
  if (!out.achieved && fx < kLogFloor) out.D = 0.0;
  out.E = std::sqrt(out.D);
  out.F = out.D > 0.0 ? 1.0 / out.E : std::numeric_limits<double>::infinity();
  if (!out.converged && out.achieved && it >= opts.max_iter)
    out.note = "iteration cap reached before convergence";
  return out;
}

int tri_params(int n) { return n * (n + 1) / 2; }

// Lower-triangular factor with exponential diagonal from packed parameters.
MatrixXd unpack_cholesky(const double* theta, int n) {
  MatrixXd L = MatrixXd::Zero(n, n);
  int at = 0;
  for (int col = 0; col < n; ++col) {
    L(col, col) = std::exp(theta[at++]);
    for (int row = col + 1; row < n; ++row) L(row, col) = theta[at++];
  }
  return L;
}

}  // namespace

GaussianOptimum minimize(const RankOneDatum& d, const MinorTable& table, const VectorXd& c,
                         const MinimizeOptions& opts) {
  VectorXd shift = c.array().log();
  return lse_minimize(d, table, c, shift, opts);
}

GaussianOptimum determinant_infimum(const RankOneDatum& d, const MinorTable& table,
                                    const VectorXd& c, const MinimizeOptions& opts) {
  VectorXd shift = VectorXd::Zero(table.m);
  return lse_minimize(d, table, c, shift, opts);
}

GaussianOptimum minimize_block(const MultiDatum& d, const MinimizeOptions& opts) {
  GaussianOptimum out;
  int m = d.m(), n = d.n;
  std::vector<int> dims(m), offsets(m);
  int nparams = 0;
  for (int i = 0; i < m; ++i) {
    dims[i] = static_cast<int>(d.blocks[i].B.rows());
    offsets[i] = nparams;
    nparams += tri_params(dims[i]);
  }

  // For isotropy-compatible weights (sum c_i dim_i = n) the objective is
  // invariant under A_i -> t A_i for all i at once; the weighted sum of
  // diagonal parameters is the gauge of that orbit.
  double weight = 0.0;
  for (int i = 0; i < m; ++i) weight += d.blocks[i].c * dims[i];
  bool scale_free = std::abs(weight - n) < 1e-9;

  auto assemble = [&](const VectorXd& theta, std::vector<MatrixXd>& L, std::vector<MatrixXd>& A) {
    L.resize(m);
    A.resize(m);
    for (int i = 0; i < m; ++i) {
      L[i] = unpack_cholesky(theta.data() + offsets[i], dims[i]);
      A[i] = L[i] * L[i].transpose();
    }
  };

  auto objective = [&](const VectorXd& theta) {
    std::vector<MatrixXd> L, A;
    assemble(theta, L, A);
    MatrixXd q = MatrixXd::Zero(n, n);
    double log_prod = 0.0;
    for (int i = 0; i < m; ++i) {
      q += d.blocks[i].c * d.blocks[i].B.transpose() * A[i] * d.blocks[i].B;
      log_prod += 2.0 * d.blocks[i].c * L[i].diagonal().array().log().sum();
    }
    Eigen::LLT<MatrixXd> llt(q);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    double log_q = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return log_q - log_prod;
  };

  auto gradient = [&](const VectorXd& theta) {
    std::vector<MatrixXd> L, A;
    assemble(theta, L, A);
    MatrixXd q = MatrixXd::Zero(n, n);
    for (int i = 0; i < m; ++i)
      q += d.blocks[i].c * d.blocks[i].B.transpose() * A[i] * d.blocks[i].B;
    Eigen::LLT<MatrixXd> llt(q);
    MatrixXd q_inv = llt.solve(MatrixXd::Identity(n, n));
    VectorXd g(nparams);
    for (int i = 0; i < m; ++i) {
      int ni = dims[i];
      MatrixXd a_inv = A[i].llt().solve(MatrixXd::Identity(ni, ni));
      MatrixXd s = d.blocks[i].c * (d.blocks[i].B * q_inv * d.blocks[i].B.transpose() - a_inv);
      MatrixXd gl = 2.0 * s * L[i];
      int at = offsets[i];
      for (int col = 0; col < ni; ++col) {
        g[at++] = gl(col, col) * L[i](col, col);  // chain through exp diagonal
        for (int row = col + 1; row < ni; ++row) g[at++] = gl(row, col);
      }
    }
    return g;
  };

  VectorXd theta = VectorXd::Zero(nparams);
  if (opts.randomize_start) {
    std::mt19937_64 rng(split_seed(opts.seed, 0xb10c));
    std::normal_distribution<double> gauss(0.0, 0.3);
    for (int i = 0; i < nparams; ++i) theta[i] = gauss(rng);
  }
  double fx = objective(theta);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    VectorXd g = gradient(theta);
    residual = g.lpNorm<Eigen::Infinity>();
    if (residual <= opts.tol) {
      out.converged = true;
      break;
    }
    if (theta.lpNorm<Eigen::Infinity>() > opts.divergence) {
      out.achieved = false;
      out.note = "iterates diverge: the infimum is not attained";
      break;
    }
    // Forward-difference Hessian; the global scaling direction is flat, so
    // always damp.
    MatrixXd h(nparams, nparams);
    double fd = 1e-6;
    for (int j = 0; j < nparams; ++j) {
      VectorXd tp = theta;
      tp[j] += fd;
      h.col(j) = (gradient(tp) - g) / fd;
    }
    h = 0.5 * (h + h.transpose());
    VectorXd step;
    double mu = 1e-9;
    for (int tries = 0; tries < 14; ++tries) {
      Eigen::LLT<MatrixXd> llt(h + mu * MatrixXd::Identity(nparams, nparams));
      if (llt.info() == Eigen::Success) {
        step = llt.solve(-g);
        if (step.dot(g) < 0.0) break;
      }
      mu *= 100.0;
      step.resize(0);
    }
    if (step.size() == 0) step = -g;
    if (scale_free) {
      // Remove the step's gauge drift; the flat scaling direction otherwise
      // soaks up noise-scale Hessian eigenvalues and runs the iterate away.
      double drift = 0.0;
      for (int i = 0; i < m; ++i) {
        int at = offsets[i];
        for (int col = 0; col < dims[i]; ++col) {
          drift += 2.0 * d.blocks[i].c * step[at];
          at += dims[i] - col;
        }
      }
      double a = drift / weight;
      for (int i = 0; i < m; ++i) {
        int at = offsets[i];
        for (int col = 0; col < dims[i]; ++col) {
          step[at] -= 0.5 * a;
          for (int row = col + 1; row < dims[i]; ++row)
            step[at + row - col] -= 0.5 * a * theta[at + row - col];
          at += dims[i] - col;
        }
      }
    }
    double t = 1.0, slope = step.dot(g);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      double ft = objective(theta + t * step);
      if (ft <= fx + 1e-4 * t * slope) {
        theta += t * step;
        fx = ft;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      out.note = "line search stalled";
      break;
    }
  }
  out.iterations = it;
  out.residual = residual;
  std::vector<MatrixXd> L;
  assemble(theta, L, out.blocks);
  out.D = std::exp(fx);
  out.E = std::sqrt(out.D);
  out.F = out.D > 0.0 ? 1.0 / out.E : std::numeric_limits<double>::infinity();
  if (!out.converged && out.achieved && it >= opts.max_iter)
    out.note = "iteration cap reached before convergence";
  return out;
}

std::pair<bool, double> uniqueness_check(const GaussianOptimum& a, const GaussianOptimum& b,
                                         double tol) {
  if (a.lambda.size() != b.lambda.size() || a.lambda.size() == 0) return {false, 0.0};
  int m = static_cast<int>(a.lambda.size());
  double log_r = 0.0;
  for (int i = 0; i < m; ++i) {
    if (!(a.lambda[i] > 0.0) || !(b.lambda[i] > 0.0)) return {false, 0.0};
    log_r += std::log(b.lambda[i] / a.lambda[i]);
  }
  log_r /= m;
  double r = std::exp(log_r);
  for (int i = 0; i < m; ++i)
    if (std::abs(b.lambda[i] / a.lambda[i] - r) > tol * r) return {false, r};
  return {true, r};
}

std::vector<GaussianDescriptor> extremizer_family(const RankOneDatum& d, const GaussianOptimum& opt,
                                                  Side side, const ExtremizerParams& params) {
  if (!(params.a > 0.0)) throw std::invalid_argument("extremizer_family: a must be positive");
  std::vector<GaussianDescriptor> fam(d.m());
  for (int i = 0; i < d.m(); ++i) {
    double lam = opt.lambda[i];
    GaussianDescriptor g;
    if (side == Side::BL) {
      g.precision = lam * params.a * params.a;
      g.center = params.y.size() ? d.vectors.col(i).dot(params.y) / params.a : 0.0;
    } else {
      g.precision = params.a * params.a / lam;
      g.center = params.t.size() ? params.t[i] / params.a : 0.0;
    }
    fam[i] = g;
  }
  return fam;
}

YoungResult young_constant(const MatrixXd& V, int n, double r, const VectorXd& p,
                           const MinimizeOptions& opts) {
  int m = static_cast<int>(V.rows());
  if (V.cols() != m) throw std::invalid_argument("young_constant: V must be square");
  if (n < 1 || n >= m) throw std::invalid_argument("young_constant: need 1 <= n < m");
  double ortho = (V.transpose() * V - MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (ortho > 1e-10) throw std::invalid_argument("young_constant: V is not orthogonal");
  if (!(r > 1.0)) throw std::invalid_argument("young_constant: need r > 1");
  if (p.size() != m) throw std::invalid_argument("young_constant: need one exponent per row");
  double scaling = 0.0;
  for (int i = 0; i < m; ++i) {
    if (!(p[i] > 1.0)) throw std::invalid_argument("young_constant: need p_i > 1");
    scaling += 1.0 / p[i];
  }
  if (std::abs(scaling - (n + (m - n) / r)) > 1e-10)
    throw std::invalid_argument("young_constant: scaling identity sum 1/p_i = n + (m-n)/r fails");

  double r_dual = r / (r - 1.0);
  YoungResult out;
  out.datum.n = m - n;
  out.datum.vectors = V.rightCols(m - n).transpose();  // w_i = last m-n coords of row i
  out.datum.c.resize(m);
  for (int i = 0; i < m; ++i) out.datum.c[i] = r_dual * (1.0 - 1.0 / p[i]);
  out.table = minor_table(out.datum);
  out.feasibility = feasibility(out.datum, out.table);
  MinimizeOptions local = opts;
  local.feasibility = &out.feasibility;
  out.opt = determinant_infimum(out.datum, out.table, out.datum.c, local);
  if (out.opt.converged && out.opt.D > 0.0)
    out.certificate = stationarity_certificate(out.table, out.opt.lambda, out.datum.c);
  return out;
}

}  // namespace bl
