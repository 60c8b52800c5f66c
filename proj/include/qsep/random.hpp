#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qsep {

using Rng = std::mt19937_64;

/// Counter-based child seed: independent streams for trial `counter` of a run
/// started from `master`. Stable across thread counts.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter);

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform index in [0, bound).
std::size_t uniform_index(Rng& rng, std::size_t bound);

/// Uniformly random permutation of {1..size}, stored 1-based: perm[i-1] is the
/// image of i.
std::vector<std::uint32_t> random_permutation(std::size_t size, Rng& rng);

/// Inverse of a 1-based permutation.
std::vector<std::uint32_t> invert_permutation(const std::vector<std::uint32_t>& perm);

}  // namespace qsep
