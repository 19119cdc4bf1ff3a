#include "bl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "bl/common.hpp"

namespace bl {

double GridFunction::total_mass() const {
  double s = block_sum(samples.size(), [&](std::size_t k) { return samples[k]; });
  return s * cell_volume();
}

double GridFunction::value(const double* point) const {
  double w[3][2];
  int base[3];
  for (int a = 0; a < dim; ++a) {
    double rel = (point[a] - origin[a]) / cell[a];
    if (rel < 0.0 || rel > shape[a]) return 0.0;
    // position on the center lattice, clamped inside the half-cell border
    double u = std::clamp(rel - 0.5, 0.0, static_cast<double>(shape[a] - 1));
    int i0 = std::min(static_cast<int>(u), shape[a] - 2 >= 0 ? shape[a] - 2 : 0);
    double frac = shape[a] > 1 ? u - i0 : 0.0;
    base[a] = i0;
    w[a][0] = 1.0 - frac;
    w[a][1] = frac;
  }
  std::size_t stride[3] = {1, 1, 1};
  for (int a = dim - 2; a >= 0; --a) stride[a] = stride[a + 1] * shape[a + 1];
  double acc = 0.0;
  int corners = 1 << dim;
  for (int cbits = 0; cbits < corners; ++cbits) {
    double wgt = 1.0;
    std::size_t idx = 0;
    for (int a = 0; a < dim; ++a) {
      int off = (cbits >> a) & 1;
      if (shape[a] == 1 && off) {
        wgt = 0.0;
        break;
      }
      wgt *= w[a][off];
      idx += stride[a] * (base[a] + off);
    }
    if (wgt != 0.0) acc += wgt * samples[idx];
  }
  return acc;
}

ValidationReport validate(const GridFunction& g) {
  ValidationReport rep;
  if (g.dim < 1 || g.dim > 3) rep.push_back({"dim", "dim must be 1, 2 or 3"});
  std::size_t expect = 1;
  for (int a = 0; a < std::min(g.dim, 3); ++a) {
    if (g.shape[a] < 1) rep.push_back({"shape", "shape entries must be positive"});
    if (!(g.cell[a] > 0.0)) rep.push_back({"cell", "cell widths must be positive"});
    expect *= static_cast<std::size_t>(std::max(g.shape[a], 1));
  }
  if (!rep.empty()) return rep;
  if (g.samples.size() != expect) rep.push_back({"shape", "sample count differs from shape product"});
  for (double v : g.samples)
    if (!(v >= 0.0) || !std::isfinite(v)) {
      rep.push_back({"nonnegative", "samples must be finite and >= 0"});
      break;
    }
  return rep;
}

double grid_cdf(const GridFunction& g, double t) {
  if (g.dim != 1) throw std::invalid_argument("grid_cdf: 1D only");
  double mass = g.total_mass();
  if (!(mass > 0.0)) throw std::invalid_argument("grid_cdf: zero mass");
  double acc = 0.0;
  for (int k = 0; k < g.shape[0]; ++k) {
    double lo = g.origin[0] + k * g.cell[0];
    double hi = lo + g.cell[0];
    if (t <= lo) break;
    double covered = std::min(t, hi) - lo;
    acc += g.samples[k] * covered;
  }
  return acc / mass;
}

namespace {

// Inverse of the piecewise-linear CDF; jumps across zero-density cells land
// on their left edge.
double grid_quantile(const GridFunction& g, double q, double mass) {
  double target = q * mass;
  double acc = 0.0;
  for (int k = 0; k < g.shape[0]; ++k) {
    double cellmass = g.samples[k] * g.cell[0];
    if (acc + cellmass >= target) {
      double lo = g.origin[0] + k * g.cell[0];
      if (cellmass <= 0.0) return lo;
      return lo + (target - acc) / g.samples[k];
    }
    acc += cellmass;
  }
  return g.origin[0] + g.shape[0] * g.cell[0];
}

}  // namespace

double MonotoneMap::operator()(double t) const {
  if (breakpoints.empty()) return 0.0;
  if (t <= breakpoints.front()) return values.front();
  if (t >= breakpoints.back()) return values.back();
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  std::size_t j = static_cast<std::size_t>(it - breakpoints.begin());
  double t0 = breakpoints[j - 1], t1 = breakpoints[j];
  double f = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
  return values[j - 1] + f * (values[j] - values[j - 1]);
}

MonotoneMap monotone_map(const GridFunction& f, const GridFunction& h) {
  if (f.dim != 1 || h.dim != 1) throw std::invalid_argument("monotone_map: 1D only");
  double mf = f.total_mass(), mh = h.total_mass();
  if (!(mf > 0.0) || !(mh > 0.0)) throw std::invalid_argument("monotone_map: zero mass");
  MonotoneMap u;
  int edges = h.shape[0] + 1;
  u.breakpoints.resize(edges);
  u.values.resize(edges);
  double acc = 0.0;
  for (int k = 0; k < edges; ++k) {
    u.breakpoints[k] = h.origin[0] + k * h.cell[0];
    double q = std::min(acc / mh, 1.0);
    u.values[k] = grid_quantile(f, q, mf);
    if (k < h.shape[0]) acc += h.samples[k] * h.cell[0];
  }
  return u;
}

GridFunction gaussian_grid_1d(double precision, double center, int cells, double tail) {
  if (!(precision > 0.0) || cells < 2) throw std::invalid_argument("gaussian_grid_1d: bad inputs");
  double half = std::sqrt(-std::log(tail) / precision);
  GridFunction g;
  g.dim = 1;
  g.origin[0] = center - half;
  g.cell[0] = 2.0 * half / cells;
  g.shape[0] = cells;
  g.samples.resize(cells);
  for (int k = 0; k < cells; ++k) {
    double t = g.center(0, k) - center;
    g.samples[k] = std::exp(-precision * t * t);
  }
  return g;
}

GridFunction descriptor_grid(const GaussianDescriptor& g, int cells, double tail) {
  GridFunction out = gaussian_grid_1d(g.precision, g.center, cells, tail);
  if (g.amplitude != 1.0)
    for (double& v : out.samples) v *= g.amplitude;
  return out;
}

GridFunction indicator_grid_1d(double lo, double hi, int cells) {
  if (!(hi > lo) || cells < 1) throw std::invalid_argument("indicator_grid_1d: bad inputs");
  GridFunction g;
  g.dim = 1;
  g.origin[0] = lo;
  g.cell[0] = (hi - lo) / cells;
  g.shape[0] = cells;
  g.samples.assign(cells, 1.0);
  return g;
}

GridFunction random_density_1d(std::uint64_t seed, int cells) {
  std::mt19937_64 rng(split_seed(seed, 0xd1e5));
  std::uniform_int_distribution<int> nbumps(2, 4);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), width(0.3, 1.0), amp(0.5, 2.0);
  int nb = nbumps(rng);
  std::vector<std::array<double, 3>> bumps(nb);
  for (auto& b : bumps) b = {pos(rng), width(rng), amp(rng)};
  GridFunction g;
  g.dim = 1;
  g.origin[0] = -3.0;
  g.cell[0] = 6.0 / cells;
  g.shape[0] = cells;
  g.samples.resize(cells);
  for (int k = 0; k < cells; ++k) {
    double t = g.center(0, k);
    double v = 0.0;
    for (const auto& b : bumps) {
      double z = (t - b[0]) / b[1];
      v += b[2] * std::exp(-z * z);
    }
    g.samples[k] = v;
  }
  return g;
}

}  // namespace bl
