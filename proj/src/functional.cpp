#include "bl/functional.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bl/common.hpp"
#include "bl/simplex.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bl {
namespace {

struct Box {
  VectorXd lo, hi;
  bool empty = false;
};

// Coordinate bounds of {x : B_i x in supp f_i} via 2n linear programs.
// Variables x = p - q plus one slack per inequality.
Box domain_box(const MultiDatum& d, const std::vector<GridFunction>& f) {
  int n = d.n;
  int ineq = 0;
  for (const auto& blk : d.blocks) ineq += 2 * static_cast<int>(blk.B.rows());
  int cols = 2 * n + ineq;
  std::vector<std::vector<double>> A(ineq, std::vector<double>(cols, 0.0));
  std::vector<double> b(ineq, 0.0);
  int row = 0;
  for (int i = 0; i < d.m(); ++i) {
    const MatrixXd& B = d.blocks[i].B;
    for (int rr = 0; rr < B.rows(); ++rr) {
      double lo = f[i].origin[rr];
      double hi = lo + f[i].shape[rr] * f[i].cell[rr];
      for (int k = 0; k < n; ++k) {
        A[row][k] = B(rr, k);
        A[row][n + k] = -B(rr, k);
        A[row + 1][k] = -B(rr, k);
        A[row + 1][n + k] = B(rr, k);
      }
      A[row][2 * n + row] = 1.0;  // B x <= hi
      b[row] = hi;
      A[row + 1][2 * n + row + 1] = 1.0;  // -B x <= -lo
      b[row + 1] = -lo;
      row += 2;
    }
  }
  Box box;
  box.lo.resize(n);
  box.hi.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int sign = 0; sign < 2; ++sign) {
      std::vector<double> cost(cols, 0.0);
      cost[k] = sign ? 1.0 : -1.0;
      cost[n + k] = sign ? -1.0 : 1.0;
      auto res = solve_lp<double>(A, b, cost);
      if (res.status != LPStatus::optimal) {
        box.empty = true;
        return box;
      }
      double val = res.x[k] - res.x[n + k];
      (sign ? box.lo : box.hi)[k] = val;
    }
  }
  return box;
}

double riemann_J(const MultiDatum& d, const std::vector<GridFunction>& f, const Box& box,
                 int grid) {
  int n = d.n;
  std::size_t cells = 1;
  std::array<int, 3> shape{1, 1, 1};
  std::array<double, 3> width{0, 0, 0};
  for (int k = 0; k < n; ++k) {
    shape[k] = grid;
    width[k] = (box.hi[k] - box.lo[k]) / grid;
    cells *= static_cast<std::size_t>(grid);
  }
  double cellvol = 1.0;
  for (int k = 0; k < n; ++k) cellvol *= width[k];
  if (!(cellvol > 0.0)) return 0.0;
  int m = d.m();
  double sum = block_sum(cells, [&](std::size_t flat) {
    double x[3];
    std::size_t rem = flat;
    for (int k = n - 1; k >= 0; --k) {
      int idx = static_cast<int>(rem % shape[k]);
      rem /= shape[k];
      x[k] = box.lo[k] + (idx + 0.5) * width[k];
    }
    double prod = 1.0;
    for (int i = 0; i < m && prod > 0.0; ++i) {
      const MatrixXd& B = d.blocks[i].B;
      double y[3];
      for (int rr = 0; rr < B.rows(); ++rr) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += B(rr, k) * x[k];
        y[rr] = acc;
      }
      double v = f[i].value(y);
      prod = v > 0.0 ? prod * std::pow(v, d.blocks[i].c) : 0.0;
    }
    return prod;
  });
  return sum * cellvol;
}

// Flattened factor cells: value^{c_i} and scatter contribution c_i B_i^T y.
struct FactorCells {
  std::vector<double> value;
  std::vector<VectorXd> pos;
};

FactorCells factor_cells(const MultiDatum::Block& blk, const GridFunction& g, int stride) {
  FactorCells out;
  int dim = g.dim;
  std::array<int, 3> idx{0, 0, 0};
  MatrixXd bt = blk.c * blk.B.transpose();  // n x n_i
  for (;;) {
    bool take = true;
    for (int a = 0; a < dim; ++a)
      if (idx[a] % stride != 0) take = false;
    if (take) {
      std::size_t flat = 0;
      for (int a = 0; a < dim; ++a) flat = flat * g.shape[a] + idx[a];
      double v = g.samples[flat];
      if (v > 0.0) {
        VectorXd y(dim);
        for (int a = 0; a < dim; ++a) y[a] = g.center(a, idx[a]);
        out.value.push_back(std::pow(v, blk.c));
        out.pos.push_back(bt * y);
      }
    }
    int a = dim - 1;
    while (a >= 0 && ++idx[a] == g.shape[a]) idx[a--] = 0;
    if (a < 0) break;
  }
  return out;
}

double scatter_I(const MultiDatum& d, const std::vector<GridFunction>& f, int grid, int stride,
                 std::uint64_t cap) {
  int n = d.n, m = d.m();
  std::vector<FactorCells> fc(m);
  std::uint64_t product = 1;
  for (int i = 0; i < m; ++i) {
    fc[i] = factor_cells(d.blocks[i], f[i], stride);
    if (fc[i].value.empty()) return 0.0;
    product *= fc[i].value.size();
    if (product > cap) throw std::length_error("eval_I: product grid " + std::to_string(product) +
                                               " exceeds cap " + std::to_string(cap));
  }
  VectorXd lo = VectorXd::Constant(n, 0.0), hi = VectorXd::Constant(n, 0.0);
  for (int i = 0; i < m; ++i) {
    VectorXd fmin = fc[i].pos[0], fmax = fc[i].pos[0];
    for (const auto& p : fc[i].pos) {
      fmin = fmin.cwiseMin(p);
      fmax = fmax.cwiseMax(p);
    }
    lo += fmin;
    hi += fmax;
  }
  // The output box covers the true support (extreme centers plus the mapped
  // half cells). Output cells span at least two of the coarsest single-cell
  // moves per axis; finer cells leave interior holes when factor lattices are
  // commensurate, biasing the supremum toward zero.
  std::array<int, 3> shape{1, 1, 1};
  std::array<double, 3> width{1, 1, 1};
  std::size_t cells = 1;
  for (int k = 0; k < n; ++k) {
    double margin = 0.0, step = 0.0;
    for (int i = 0; i < m; ++i) {
      const MatrixXd& B = d.blocks[i].B;
      for (int b = 0; b < B.rows(); ++b) {
        double mv = std::abs(d.blocks[i].c * B(b, k)) * f[i].cell[b];
        margin += 0.5 * mv;
        step = std::max(step, mv * stride);
      }
    }
    lo[k] -= margin;
    hi[k] += margin;
    double w = hi[k] - lo[k];
    int res = 1;
    if (w > 0.0 && step > 0.0) res = std::clamp(static_cast<int>(w / (2.0 * step)), 4, grid);
    shape[k] = res;
    width[k] = w > 0.0 ? w / res : 1.0;
    cells *= static_cast<std::size_t>(res);
  }
  std::vector<double> best(cells, 0.0);

  // Odometer over factors 1..m-1; the outer loop over factor 0 cells is the
  // parallel axis. Cell maxima merge order-independently.
  std::size_t outer = fc[0].value.size();
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    std::vector<double> local(cells, 0.0);
    std::vector<int> at(m, 0);
    std::vector<double> val_prefix(m + 1, 1.0);
    std::vector<VectorXd> pos_prefix(m + 1, VectorXd::Zero(n));
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (long long k0 = 0; k0 < static_cast<long long>(outer); ++k0) {
      val_prefix[1] = fc[0].value[k0];
      pos_prefix[1] = fc[0].pos[k0];
      std::fill(at.begin() + 1, at.end(), 0);
      for (;;) {
        for (int i = 1; i < m; ++i) {
          val_prefix[i + 1] = val_prefix[i] * fc[i].value[at[i]];
          pos_prefix[i + 1] = pos_prefix[i] + fc[i].pos[at[i]];
        }
        double v = val_prefix[m];
        const VectorXd& p = pos_prefix[m];
        std::size_t flat = 0;
        for (int k = 0; k < n; ++k) {
          int idx = static_cast<int>((p[k] - lo[k]) / width[k]);
          idx = std::clamp(idx, 0, shape[k] - 1);
          flat = flat * shape[k] + idx;
        }
        if (v > local[flat]) local[flat] = v;
        int i = m - 1;
        while (i >= 1 && ++at[i] == static_cast<int>(fc[i].value.size())) at[i--] = 0;
        if (i < 1) break;
      }
    }
#ifdef _OPENMP
#pragma omp critical
#endif
    {
      for (std::size_t c = 0; c < cells; ++c)
        if (local[c] > best[c]) best[c] = local[c];
    }
  }
  double cellvol = 1.0;
  for (int k = 0; k < n; ++k) cellvol *= width[k];
  double sum = block_sum(cells, [&](std::size_t c) { return best[c]; });
  return sum * cellvol;
}

double mass_power(const MultiDatum& d, const std::vector<GridFunction>& f) {
  double acc = 1.0;
  for (int i = 0; i < d.m(); ++i) acc *= std::pow(f[i].total_mass(), d.blocks[i].c);
  return acc;
}

}  // namespace

IntegralEstimate eval_J(const MultiDatum& d, const std::vector<GridFunction>& f,
                        const FunctionalOptions& opts) {
  if (d.n > 3) throw std::invalid_argument("eval_J: n <= 3 required");
  if (static_cast<int>(f.size()) != d.m())
    throw std::invalid_argument("eval_J: one function per block required");
  for (int i = 0; i < d.m(); ++i)
    if (f[i].dim != d.blocks[i].B.rows())
      throw std::invalid_argument("eval_J: function dimension differs from block range");
  Box box = domain_box(d, f);
  if (box.empty) return {0.0, 0.0};
  double fine = riemann_J(d, f, box, opts.grid);
  double coarse = riemann_J(d, f, box, std::max(opts.grid / 2, 2));
  return {fine, std::abs(fine - coarse)};
}

IntegralEstimate eval_I(const MultiDatum& d, const std::vector<GridFunction>& f,
                        const FunctionalOptions& opts) {
  if (d.n > 3) throw std::invalid_argument("eval_I: n <= 3 required");
  if (static_cast<int>(f.size()) != d.m())
    throw std::invalid_argument("eval_I: one function per block required");
  for (int i = 0; i < d.m(); ++i)
    if (f[i].dim != d.blocks[i].B.rows())
      throw std::invalid_argument("eval_I: function dimension differs from block range");
  double fine = scatter_I(d, f, opts.grid, 1, opts.product_cap);
  double coarse = scatter_I(d, f, std::max(opts.grid / 2, 2), 2, opts.product_cap);
  return {fine, std::abs(fine - coarse)};
}

FondReport verify_fond(const MultiDatum& d, std::vector<GridFunction> f,
                       std::vector<GridFunction> h, double D, const FunctionalOptions& opts) {
  FondReport rep;
  rep.D = D;
  for (int i = 0; i < d.m(); ++i) {
    double mf = f[i].total_mass(), mh = h[i].total_mass();
    if (!(mf > 0.0) || !(mh > 0.0)) throw std::invalid_argument("verify_fond: zero mass factor");
    if (std::abs(mf - mh) > 1e-9 * std::max(mf, mh)) rep.normalized = true;
  }
  if (rep.normalized) {
    for (int i = 0; i < d.m(); ++i) {
      double mf = f[i].total_mass(), mh = h[i].total_mass();
      for (double& v : f[i].samples) v /= mf;
      for (double& v : h[i].samples) v /= mh;
    }
  }
  rep.I = eval_I(d, f, opts);
  rep.J = eval_J(d, h, opts);
  rep.gap = rep.I.value - D * rep.J.value;
  rep.violation = rep.gap < -(rep.I.error + D * rep.J.error + 1e-12);
  return rep;
}

GridFunction convolve_1d(const GridFunction& a, const GridFunction& b) {
  if (a.dim != 1 || b.dim != 1) throw std::invalid_argument("convolve_1d: 1D only");
  if (std::abs(a.cell[0] - b.cell[0]) > 1e-12 * a.cell[0])
    throw std::invalid_argument("convolve_1d: cell widths must match");
  GridFunction out;
  out.dim = 1;
  out.cell[0] = a.cell[0];
  out.shape[0] = a.shape[0] + b.shape[0] - 1;
  // center_a + center_b = out center when out.origin = o_a + o_b + cell/2
  out.origin[0] = a.origin[0] + b.origin[0] + 0.5 * a.cell[0];
  out.samples.assign(out.shape[0], 0.0);
  for (int i = 0; i < a.shape[0]; ++i) {
    double av = a.samples[i];
    if (av == 0.0) continue;
    for (int j = 0; j < b.shape[0]; ++j) out.samples[i + j] += av * b.samples[j];
  }
  for (double& v : out.samples) v *= a.cell[0];
  return out;
}

ConvolutionReport convolution_closure_check(const MultiDatum& d,
                                            const std::vector<GridFunction>& t1,
                                            const std::vector<GridFunction>& t2, Side side,
                                            double extremal, const FunctionalOptions& opts) {
  for (const auto& blk : d.blocks)
    if (blk.B.rows() != 1)
      throw std::invalid_argument("convolution_closure_check: 1D factors required");
  std::vector<GridFunction> conv(d.m());
  for (int i = 0; i < d.m(); ++i) conv[i] = convolve_1d(t1[i], t2[i]);

  auto ratio = [&](const std::vector<GridFunction>& t) {
    IntegralEstimate est = side == Side::BL ? eval_J(d, t, opts) : eval_I(d, t, opts);
    double mp = mass_power(d, t);
    return std::pair<double, double>{est.value / mp, est.error / mp};
  };
  ConvolutionReport rep;
  rep.extremal = extremal;
  auto [r1, e1] = ratio(t1);
  auto [r2, e2] = ratio(t2);
  auto [rc, ec] = ratio(conv);
  rep.ratio1 = r1;
  rep.ratio2 = r2;
  rep.ratio_conv = rc;
  rep.conv_error = ec;
  rep.tau = std::max(std::abs(r1 - extremal) + e1, std::abs(r2 - extremal) + e2);
  rep.pass = std::abs(rc - extremal) <= 5.0 * rep.tau + ec;
  return rep;
}

}  // namespace bl
