#pragma once

#include "bl/grid.hpp"

namespace bl {

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;  // |value - half-resolution value|
};

struct FunctionalOptions {
  int grid = 128;                  // integration cells per axis
  std::uint64_t product_cap = 100'000'000;  // bound on the scatter product grid
};

// J(f) = integral over R^n of prod f_i^{c_i}(B_i x) dx. The domain is the
// polytope {x : B_i x in supp f_i}, boxed by linear programs; Riemann sums at
// full and half resolution give the value and its error estimate. n <= 3.
IntegralEstimate eval_J(const MultiDatum& d, const std::vector<GridFunction>& f,
                        const FunctionalOptions& opts = {});

// I(f) = upper integral of sup{ prod f_i^{c_i}(y_i) : x = sum c_i B_i^T y_i }.
// Scatter over the product of factor cells with cellwise max, then a Riemann
// sum. Throws std::length_error when the product of factor grid sizes
// exceeds the cap.
IntegralEstimate eval_I(const MultiDatum& d, const std::vector<GridFunction>& f,
                        const FunctionalOptions& opts = {});

struct FondReport {
  IntegralEstimate I;
  IntegralEstimate J;
  double D = 0.0;
  double gap = 0.0;  // I - D J
  bool normalized = false;  // masses disagreed and were renormalized
  bool violation = false;   // gap below -(combined error)
};

// Checks I(f) >= D * J(h) for tuples with matching masses; mismatched masses
// are normalized to 1 first and flagged.
FondReport verify_fond(const MultiDatum& d, std::vector<GridFunction> f,
                       std::vector<GridFunction> h, double D,
                       const FunctionalOptions& opts = {});

// Factorwise 1D convolution on matching cell widths; masses multiply.
GridFunction convolve_1d(const GridFunction& a, const GridFunction& b);

struct ConvolutionReport {
  double ratio1 = 0.0, ratio2 = 0.0, ratio_conv = 0.0;
  double extremal = 0.0;
  double tau = 0.0;  // worse input deviation, including quadrature error
  double conv_error = 0.0;
  bool pass = false;  // convolved deviation <= 5 tau + its own error
};

// Extremizer closure under convolution: mass-normalized ratio of the
// convolved tuple stays within 5x the input tuples' deviation from the
// extremal ratio (J/prod-mass^c vs F on the BL side, I/prod-mass^c vs E on
// the RBL side). Factors must be one-dimensional.
ConvolutionReport convolution_closure_check(const MultiDatum& d,
                                            const std::vector<GridFunction>& t1,
                                            const std::vector<GridFunction>& t2,
                                            Side side, double extremal,
                                            const FunctionalOptions& opts = {});

}  // namespace bl
