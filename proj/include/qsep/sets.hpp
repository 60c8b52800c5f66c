#pragma once

#include "qsep/random.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qsep {

/// Finite subset of a 1-based ground set, kept sorted and duplicate-free.
using Set = std::vector<std::uint32_t>;

Set make_set(std::vector<std::uint32_t> elements);

Set set_intersection(const Set& a, const Set& b);
Set set_union(const Set& a, const Set& b);
Set set_difference(const Set& a, const Set& b);
std::size_t intersection_size(const Set& a, const Set& b);
bool contains(const Set& s, std::uint32_t element);
bool is_subset(const Set& sub, const Set& super);

/// Uniform `size`-subset of {1..universe} (Floyd's algorithm).
Set random_subset(std::uint32_t universe, std::size_t size, Rng& rng);

/// Uniform `size`-subset of the given pool (pool need not be sorted).
Set random_subset_of(std::span<const std::uint32_t> pool, std::size_t size, Rng& rng);

/// Applies a 1-based permutation elementwise.
Set apply_permutation(const std::vector<std::uint32_t>& perm, const Set& s);

/// Bit (e-1) set for every element e; universe must be at most 64.
std::uint64_t to_mask(const Set& s);
Set from_mask(std::uint64_t mask);

/// Every `size`-subset of {1..universe} as a bitmask, in increasing numeric order.
std::vector<std::uint64_t> all_subsets_mask(std::uint32_t universe, std::uint32_t size);

/// Lexicographic rank (0-based) of a subset among all subsets of the same size
/// of {1..universe}; the count must fit in 64 bits.
std::uint64_t subset_rank(const Set& s, std::uint32_t universe);
Set subset_unrank(std::uint64_t rank, std::uint32_t universe, std::uint32_t size);

/// C(n, k) in 64 bits; throws on overflow.
std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k);

std::string to_string(const Set& s);

}  // namespace qsep
