#include "bl/minors.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace bl {

std::uint64_t binomial(int m, int k) {
  if (k < 0 || k > m) return 0;
  k = std::min(k, m - k);
  std::uint64_t r = 1;
  for (int j = 1; j <= k; ++j) {
    std::uint64_t num = static_cast<std::uint64_t>(m - k + j);
    if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    r = r * num / j;
  }
  return r;
}

std::uint64_t combination_rank(const int* comb, int k, int m) {
  std::uint64_t rank = 0;
  int prev = -1;
  for (int pos = 0; pos < k; ++pos) {
    for (int v = prev + 1; v < comb[pos]; ++v) rank += binomial(m - 1 - v, k - 1 - pos);
    prev = comb[pos];
  }
  return rank;
}

void combination_unrank(std::uint64_t rank, int k, int m, int* out) {
  int v = 0;
  for (int pos = 0; pos < k; ++pos) {
    for (;; ++v) {
      std::uint64_t block = binomial(m - 1 - v, k - 1 - pos);
      if (rank < block) break;
      rank -= block;
    }
    out[pos] = v++;
  }
}

bool combination_next(int* comb, int k, int m) {
  int i = k - 1;
  while (i >= 0 && comb[i] == m - k + i) --i;
  if (i < 0) return false;
  ++comb[i];
  for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  return true;
}

double block_sum(std::size_t count, const std::function<double(std::size_t)>& term) {
  std::size_t nblocks = (count + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nblocks, 0.0);
  parallel_index_for(nblocks, [&](std::size_t b) {
    std::size_t lo = b * kReduceBlock;
    std::size_t hi = std::min(count, lo + kReduceBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

subset_cap_error::subset_cap_error(std::uint64_t req, std::uint64_t c)
    : std::runtime_error("subset enumeration C(m,n)=" + std::to_string(req) +
                         " exceeds cap " + std::to_string(c)),
      requested(req),
      cap(c) {}

namespace {

MinorTable make_table(const RankOneDatum& d, const MinorOptions& opts, bool parallel) {
  int n = d.n, m = d.m();
  std::uint64_t count = binomial(m, n);
  if (count > opts.cap) throw subset_cap_error(count, opts.cap);
  MinorTable t;
  t.n = n;
  t.m = m;
  t.clamp = opts.clamp;
  t.subsets.resize(count * n);
  t.minors.resize(count);

  auto fill_chunk = [&](std::uint64_t lo, std::uint64_t hi) {
    std::vector<int> comb(n);
    combination_unrank(lo, n, m, comb.data());
    MatrixXd sub(n, n);
    for (std::uint64_t k = lo; k < hi; ++k) {
      for (int j = 0; j < n; ++j) {
        t.subsets[k * n + j] = comb[j];
        sub.col(j) = d.vectors.col(comb[j]);
      }
      double det = (n == 1) ? sub(0, 0) : sub.partialPivLu().determinant();
      double sq = det * det;
      t.minors[k] = sq < opts.clamp ? 0.0 : sq;
      if (k + 1 < hi) combination_next(comb.data(), n, m);
    }
  };

  if (!parallel) {
    fill_chunk(0, count);
    return t;
  }
  const std::uint64_t chunk = 4096;
  std::uint64_t nchunks = (count + chunk - 1) / chunk;
  parallel_index_for(nchunks, [&](std::size_t b) {
    std::uint64_t lo = b * chunk;
    fill_chunk(lo, std::min(count, lo + chunk));
  });
  return t;
}

}  // namespace

MinorTable minor_table(const RankOneDatum& d, const MinorOptions& opts) {
  return make_table(d, opts, opts.parallel);
}

MinorTable minor_table_serial(const RankOneDatum& d, const MinorOptions& opts) {
  return make_table(d, opts, false);
}

double log_weighted_gram_det(const MinorTable& table, const VectorXd& x, const VectorXd* shift) {
  std::uint64_t count = table.count();
  VectorXd z = x;
  if (shift) z += *shift;
  // exponent of each admissible term; -inf marks clamped minors
  std::vector<double> expo(count);
  parallel_index_for(count, [&](std::size_t k) {
    double dk = table.minors[k];
    if (dk <= 0.0) {
      expo[k] = -std::numeric_limits<double>::infinity();
      return;
    }
    const int* I = table.subset(k);
    double s = std::log(dk);
    for (int j = 0; j < table.n; ++j) s += z[I[j]];
    expo[k] = s;
  });
  double top = -std::numeric_limits<double>::infinity();
  for (double e : expo) top = std::max(top, e);
  if (!std::isfinite(top)) return -std::numeric_limits<double>::infinity();
  double s = block_sum(count, [&](std::size_t k) {
    double e = expo[k];
    return std::isfinite(e) ? std::exp(e - top) : 0.0;
  });
  return top + std::log(s);
}

VectorXd subset_mass(const MinorTable& table, const VectorXd& x, const VectorXd* shift) {
  std::uint64_t count = table.count();
  VectorXd z = x;
  if (shift) z += *shift;
  std::vector<double> expo(count, -std::numeric_limits<double>::infinity());
  for (std::uint64_t k = 0; k < count; ++k) {
    double dk = table.minors[k];
    if (dk <= 0.0) continue;
    const int* I = table.subset(k);
    double s = std::log(dk);
    for (int j = 0; j < table.n; ++j) s += z[I[j]];
    expo[k] = s;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double e : expo) top = std::max(top, e);
  VectorXd mass = VectorXd::Zero(table.m);
  if (!std::isfinite(top)) return mass;
  double total = 0.0;
  for (std::uint64_t k = 0; k < count; ++k) {
    if (!std::isfinite(expo[k])) continue;
    double w = std::exp(expo[k] - top);
    total += w;
    const int* I = table.subset(k);
    for (int j = 0; j < table.n; ++j) mass[I[j]] += w;
  }
  return mass / total;
}

double weighted_gram_det(const MinorTable& table, const VectorXd& lambda) {
  bool extreme = false;
  for (int i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0.0)) throw std::invalid_argument("weighted_gram_det: lambda must be positive");
    if (lambda[i] > 1e100 || lambda[i] < 1e-100) extreme = true;
  }
  if (extreme) {
    VectorXd x = lambda.array().log();
    return std::exp(log_weighted_gram_det(table, x));
  }
  return block_sum(table.count(), [&](std::size_t k) {
    double dk = table.minors[k];
    if (dk <= 0.0) return 0.0;
    const int* I = table.subset(k);
    double p = dk;
    for (int j = 0; j < table.n; ++j) p *= lambda[I[j]];
    return p;
  });
}

}  // namespace bl
