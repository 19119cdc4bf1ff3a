#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bl {

// Binomial coefficients up to C(64,32); values that would overflow return
// UINT64_MAX so callers can treat them as "larger than any cap".
std::uint64_t binomial(int m, int k);

// Combinations of {0..m-1} of size k in lexicographic order.
// rank/unrank are mutually inverse; next advances in place and returns false
// after the last combination.
std::uint64_t combination_rank(const int* comb, int k, int m);
void combination_unrank(std::uint64_t rank, int k, int m, int* out);
bool combination_next(int* comb, int k, int m);

// Fixed-block sum: partial sums over blocks of `block` consecutive indices,
// folded left to right. The result is independent of thread count because
// block boundaries never move.
inline constexpr std::size_t kReduceBlock = 1024;

double block_sum(std::size_t count, const std::function<double(std::size_t)>& term);

// Parallel loop over [0, count) with static scheduling. Bodies must write
// only to slots owned by their index.
template <class F>
void parallel_index_for(std::size_t count, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(count); ++i)
    body(static_cast<std::size_t>(i));
}

// splitmix64: decorrelates per-block RNG streams derived from one seed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct subset_cap_error : std::runtime_error {
  std::uint64_t requested;
  std::uint64_t cap;
  subset_cap_error(std::uint64_t req, std::uint64_t c);
};

}  // namespace bl
