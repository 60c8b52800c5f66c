#include "qsep/random.hpp"

#include <algorithm>
#include <numeric>

namespace qsep {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  // splitmix64 over master ^ golden-ratio-spaced counter
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::size_t uniform_index(Rng& rng, std::size_t bound) {
  return std::uniform_int_distribution<std::size_t>(0, bound - 1)(rng);
}

std::vector<std::uint32_t> random_permutation(std::size_t size, Rng& rng) {
  std::vector<std::uint32_t> perm(size);
  std::iota(perm.begin(), perm.end(), 1u);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

std::vector<std::uint32_t> invert_permutation(const std::vector<std::uint32_t>& perm) {
  std::vector<std::uint32_t> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i] - 1] = static_cast<std::uint32_t>(i + 1);
  return inverse;
}

}  // namespace qsep
