#include "qsep/sets.hpp"

#include "qsep/errors.hpp"

#include <algorithm>
#include <bit>
#include <iterator>
#include <limits>
#include <unordered_set>

namespace qsep {

Set make_set(std::vector<std::uint32_t> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  return elements;
}

Set set_intersection(const Set& a, const Set& b) {
  Set out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Set set_union(const Set& a, const Set& b) {
  Set out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Set set_difference(const Set& a, const Set& b) {
  Set out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::size_t intersection_size(const Set& a, const Set& b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

bool contains(const Set& s, std::uint32_t element) {
  return std::binary_search(s.begin(), s.end(), element);
}

bool is_subset(const Set& sub, const Set& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

Set random_subset(std::uint32_t universe, std::size_t size, Rng& rng) {
  require(size <= universe, "subset larger than universe");
  // Floyd: for j = N-k+1..N pick t in [1, j]; insert t, or j if t is taken.
  std::unordered_set<std::uint32_t> chosen;
  chosen.reserve(size * 2);
  for (std::uint32_t j = universe - static_cast<std::uint32_t>(size) + 1; j <= universe && size > 0; ++j) {
    auto t = static_cast<std::uint32_t>(uniform_index(rng, j) + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return make_set(Set(chosen.begin(), chosen.end()));
}

Set random_subset_of(std::span<const std::uint32_t> pool, std::size_t size, Rng& rng) {
  require(size <= pool.size(), "subset larger than pool");
  Set positions = random_subset(static_cast<std::uint32_t>(pool.size()), size, rng);
  Set out;
  out.reserve(size);
  for (auto p : positions) out.push_back(pool[p - 1]);
  return make_set(std::move(out));
}

Set apply_permutation(const std::vector<std::uint32_t>& perm, const Set& s) {
  Set out;
  out.reserve(s.size());
  for (auto e : s) {
    require(e >= 1 && e <= perm.size(), "element outside permutation domain");
    out.push_back(perm[e - 1]);
  }
  return make_set(std::move(out));
}

std::uint64_t to_mask(const Set& s) {
  std::uint64_t mask = 0;
  for (auto e : s) {
    require(e >= 1 && e <= 64, "mask form needs elements in [1, 64]");
    mask |= std::uint64_t{1} << (e - 1);
  }
  return mask;
}

Set from_mask(std::uint64_t mask) {
  Set out;
  while (mask) {
    out.push_back(static_cast<std::uint32_t>(std::countr_zero(mask)) + 1);
    mask &= mask - 1;
  }
  return out;
}

std::vector<std::uint64_t> all_subsets_mask(std::uint32_t universe, std::uint32_t size) {
  require(universe <= 64, "mask enumeration needs universe <= 64");
  std::vector<std::uint64_t> out;
  if (size > universe) return out;
  if (size == 0) return {0};
  // Gosper's hack walks k-subsets in increasing numeric order.
  std::uint64_t mask = (size == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << size) - 1);
  const std::uint64_t limit = universe == 64 ? 0 : (std::uint64_t{1} << universe);
  while (true) {
    out.push_back(mask);
    std::uint64_t c = mask & (~mask + 1);
    std::uint64_t r = mask + c;
    if (r == 0) break;
    mask = (((r ^ mask) >> 2) / c) | r;
    if (limit != 0 && mask >= limit) break;
  }
  return out;
}

std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    require(result <= std::numeric_limits<std::uint64_t>::max(), "binomial overflows 64 bits");
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t subset_rank(const Set& s, std::uint32_t universe) {
  // Counts the subsets that precede s lexicographically (as sorted sequences).
  std::uint64_t rank = 0;
  const auto size = static_cast<std::uint32_t>(s.size());
  std::uint32_t previous = 0;
  for (std::uint32_t i = 0; i < size; ++i) {
    require(s[i] > previous && s[i] <= universe, "set outside universe");
    for (std::uint32_t e = previous + 1; e < s[i]; ++e) rank += binomial_u64(universe - e, size - i - 1);
    previous = s[i];
  }
  return rank;
}

Set subset_unrank(std::uint64_t rank, std::uint32_t universe, std::uint32_t size) {
  require(rank < binomial_u64(universe, size), "rank out of range");
  Set out;
  std::uint32_t e = 1;
  for (std::uint32_t i = 0; i < size; ++i) {
    while (true) {
      std::uint64_t block = binomial_u64(universe - e, size - i - 1);
      if (rank < block) break;
      rank -= block;
      ++e;
    }
    out.push_back(e++);
  }
  return out;
}

std::string to_string(const Set& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "}";
}

}  // namespace qsep
