#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "bl/datum.hpp"
#include "bl/minors.hpp"

namespace blt {

inline bl::RankOneDatum make_datum(int n, const std::vector<std::vector<double>>& cols,
                                   const std::vector<double>& c) {
  bl::RankOneDatum d;
  d.n = n;
  d.vectors.resize(n, static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i)
    for (int k = 0; k < n; ++k) d.vectors(k, i) = cols[i][k];
  d.c = Eigen::Map<const bl::VectorXd>(c.data(), c.size());
  return d;
}

// Gaussian columns with equal exponents n/m; valid with probability 1.
inline bl::RankOneDatum random_rank_one(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  bl::RankOneDatum d;
  d.n = n;
  d.vectors.resize(n, m);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < n; ++k) d.vectors(k, i) = gauss(rng);
  d.c = bl::VectorXd::Constant(m, static_cast<double>(n) / m);
  return d;
}

inline bl::VectorXd random_exponents(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  bl::VectorXd c(m);
  for (int i = 0; i < m; ++i) c[i] = unif(rng);
  return c * (n / c.sum());
}

inline bl::MatrixXd random_spd(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  bl::MatrixXd g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) g(r, c) = gauss(rng);
  return g * g.transpose() + 0.1 * bl::MatrixXd::Identity(n, n);
}

// Three unit directions at mutual angle 120 degrees, weights 2/3:
// sum c_i u_i u_i^T = I_2.
inline bl::RankOneDatum hexagon_datum() {
  double s = std::sqrt(3.0) / 2.0;
  return make_datum(2, {{1.0, 0.0}, {-0.5, s}, {-0.5, -s}}, {2.0 / 3, 2.0 / 3, 2.0 / 3});
}

// {e1, e2, (e1+e2)/sqrt(2)} with the boundary exponents (1, 3/4, 1/4).
inline bl::RankOneDatum boundary_datum() {
  double r = 1.0 / std::sqrt(2.0);
  return make_datum(2, {{1.0, 0.0}, {0.0, 1.0}, {r, r}}, {1.0, 0.75, 0.25});
}

// Same vectors with interior exponents (1/2, 3/4, 3/4).
inline bl::RankOneDatum interior_datum() {
  double r = 1.0 / std::sqrt(2.0);
  return make_datum(2, {{1.0, 0.0}, {0.0, 1.0}, {r, r}}, {0.5, 0.75, 0.75});
}

// Exponents in the relative interior by construction: a strictly positive
// convex combination of the admissible subset indicators.
inline bl::VectorXd interior_exponents(const bl::MinorTable& table, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  bl::VectorXd c = bl::VectorXd::Zero(table.m);
  double total = 0.0;
  for (std::uint64_t k = 0; k < table.count(); ++k) {
    if (table.minors[k] == 0.0) continue;
    double t = unif(rng);
    total += t;
    for (int j = 0; j < table.n; ++j) c[table.subset(k)[j]] += t;
  }
  return c / total;
}

// Refining grid search for the determinant infimum, independent of the
// Newton path: 41-point log grids per free coordinate (the last scalar is
// pinned by scale invariance), window shrunk around the incumbent.
inline double oracle_constant(const bl::MinorTable& table, const bl::VectorXd& c,
                              bool effective_weights, int rounds = 4) {
  int m = table.m;
  int free = m - 1;
  std::vector<double> center(free, 0.0), argbest(free, 0.0), x(m, 0.0);
  double span = 10.0;
  double best = std::numeric_limits<double>::infinity();
  for (int round = 0; round < rounds; ++round) {
    std::vector<int> at(free, 0);
    for (;;) {
      for (int j = 0; j < free; ++j) x[j] = center[j] + span * (at[j] - 20) / 20.0;
      double den = 0.0;
      for (int i = 0; i < m; ++i) den += c[i] * x[i];
      double num = 0.0;
      for (std::uint64_t k = 0; k < table.count(); ++k) {
        double term = table.minors[k];
        if (term == 0.0) continue;
        const int* I = table.subset(k);
        for (int j = 0; j < table.n; ++j) {
          int i = I[j];
          term *= (effective_weights ? c[i] : 1.0) * std::exp(x[i]);
        }
        num += term;
      }
      double val = num / std::exp(den);
      if (val < best) {
        best = val;
        for (int j = 0; j < free; ++j) argbest[j] = x[j];
      }
      int j = free - 1;
      while (j >= 0 && ++at[j] == 41) at[j--] = 0;
      if (j < 0) break;
    }
    center = argbest;
    span = span / 20.0 * 1.5;
  }
  return best;
}

}  // namespace blt
