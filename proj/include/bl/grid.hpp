#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bl/datum.hpp"

namespace bl {

// Nonnegative density sampled at cell centers of a uniform grid, dim <= 3.
// samples are row-major; the support box is [origin, origin + shape * cell).
struct GridFunction {
  int dim = 1;
  std::array<double, 3> origin{};
  std::array<double, 3> cell{};
  std::array<int, 3> shape{1, 1, 1};
  std::vector<double> samples;

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(shape[a]);
    return s;
  }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= cell[a];
    return v;
  }
  double total_mass() const;
  double center(int axis, int index) const { return origin[axis] + (index + 0.5) * cell[axis]; }
  // Multilinear interpolation of the center samples; 0 outside the support
  // box, nearest-center inside the half-cell border.
  double value(const double* point) const;
  double value1(double t) const { return value(&t); }
};

// Consistency checks: dim in 1..3, positive cells, shape matching samples,
// nonnegative samples.
ValidationReport validate(const GridFunction& g);

// Nondecreasing piecewise-linear map given by breakpoints and values.
struct MonotoneMap {
  std::vector<double> breakpoints;
  std::vector<double> values;
  double operator()(double t) const;
};

// Monotone rearrangement u with u push-forward of h equal to f (1D): the
// quantile composition u = F_f^{-1} o F_h after normalizing both masses.
// Requires positive masses.
MonotoneMap monotone_map(const GridFunction& f, const GridFunction& h);

// CDF of a 1D grid density at a point, mass-normalized.
double grid_cdf(const GridFunction& g, double t);

// One-dimensional Gaussian h(t) = amplitude * exp(-precision (t - center)^2).
struct GaussianDescriptor {
  double amplitude = 1.0;
  double precision = 0.0;
  double center = 0.0;
};

// Samplers. Gaussian boxes are cut where the density falls below
// tail * peak, so the excluded mass stays below ~1e-6 at the default.
GridFunction gaussian_grid_1d(double precision, double center, int cells, double tail = 1e-12);
GridFunction descriptor_grid(const GaussianDescriptor& g, int cells, double tail = 1e-12);
GridFunction indicator_grid_1d(double lo, double hi, int cells);
// Mixture of 2-4 seeded Gaussian bumps inside [-3, 3]; smooth and positive.
GridFunction random_density_1d(std::uint64_t seed, int cells);

}  // namespace bl
