#pragma once

#include "qsep/gf2.hpp"
#include "qsep/random.hpp"
#include "qsep/rational.hpp"
#include "qsep/sets.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace qsep {

/// Input pair for PS and Piip: x, y subsets of [n^2] with |x| = n/2, |y| = n.
struct Instance {
  std::uint32_t n = 0;
  Set x;
  Set y;

  std::uint32_t universe() const noexcept { return n * n; }
  /// Throws ContractViolation unless the shape invariants hold.
  void validate() const;
  std::size_t overlap() const { return intersection_size(x, y); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Input to Pin: x subset of [2n^2] with |x| = n, and n/4 pairwise disjoint
/// blocks of size n, each meeting x in exactly two elements.
struct PinInstance {
  std::uint32_t n = 0;
  Set x;
  std::vector<Set> blocks;

  std::uint32_t universe() const noexcept { return 2 * n * n; }
  std::uint32_t block_count() const noexcept { return n / 4; }
  void validate() const;

  friend bool operator==(const PinInstance&, const PinInstance&) = default;
};

/// Answer to Pin: a 1-based block index and a vector of 2 log n + 1 bits.
struct PinAnswer {
  std::uint32_t block = 0;
  gf2::BitString z;
};

/// Checks n is a power of two with n >= 4.
void validate_size(std::uint32_t n);
int log2_n(std::uint32_t n);

/// Width of PS answers (2 log n) and of Pin answers (2 log n + 1).
int ps_answer_bits(std::uint32_t n);
int pin_answer_bits(std::uint32_t n);

/// Events on input pairs.
struct Event {
  enum class Kind { kSize, kSingle, kPair };
  Kind kind = Kind::kSize;
  std::uint32_t size = 0;   // X_j
  std::uint32_t first = 0;  // X1(i) / X2(i, j)
  std::uint32_t second = 0;

  static Event intersection_size(std::uint32_t j) { return {Kind::kSize, j, 0, 0}; }
  static Event single(std::uint32_t i) { return {Kind::kSingle, 0, i, 0}; }
  static Event pair(std::uint32_t i, std::uint32_t j);

  bool holds(const Set& x, const Set& y) const;
};

/// Uniform distribution over valid instances, conditioned on the intersection
/// size lying in `sizes`, optionally further restricted by a predicate
/// (rejection sampling on top of the conditioned sampler).
struct DistributionSpec {
  std::uint32_t n = 0;
  std::vector<std::uint32_t> sizes;  // empty = unconditioned
  std::function<bool(const Instance&)> restriction;

  static DistributionSpec uniform(std::uint32_t n) { return {n, {}, {}}; }
  static DistributionSpec exactly(std::uint32_t n, std::uint32_t j) { return {n, {j}, {}}; }
  static DistributionSpec at_least(std::uint32_t n, std::uint32_t j);
};

// Relations --------------------------------------------------------------

/// PS: true iff |x ∩ y| != 2 or <z, sigma(a) + sigma(b)> = 0 for {a, b} = x ∩ y.
/// z must be nonzero with sigma.bits() bits.
bool member_ps(const Instance& inst, const gf2::BitString& z, const gf2::SigmaEncoding& sigma);
/// Same with sigma0 on 2 log n bits.
bool member_ps(const Instance& inst, const gf2::BitString& z);

/// Pin: <z, sigma0(a) + sigma0(b)> = 0 for {a, b} = x ∩ y_i.
bool member_pin(const PinInstance& inst, const PinAnswer& answer);

/// Piip: z == x ∩ y.
bool member_piip(const Instance& inst, const Set& z);

// Exact distributions -----------------------------------------------------

/// Pr[|x ∩ y| = j] for a uniform pair of sizes (size_x, size_y) in [universe].
std::vector<Rational> intersection_pmf(std::uint32_t universe, std::uint32_t size_x, std::uint32_t size_y);
/// PS-shaped: universe n^2, sizes n/2 and n. Index j runs over 0..n/2.
std::vector<Rational> intersection_pmf(std::uint32_t n);

struct TailCheck {
  Rational tail;
  Rational bound;
  bool pass = false;
};

/// Compares Pr[|x ∩ y| >= t] with (3/4)^t exactly. Requires t <= n/2.
TailCheck tail_bound_check(std::uint32_t n, std::uint32_t t);

// Samplers -----------------------------------------------------------------

/// Uniform pair (x, y) of sizes (size_x, size_y) in [universe] with
/// |x ∩ y| = overlap, by direct construction.
std::pair<Set, Set> sample_pair_with_overlap(std::uint32_t universe, std::uint32_t size_x, std::uint32_t size_y,
                                             std::uint32_t overlap, Rng& rng);

/// Draws from the conditioned uniform distribution.
///
/// The intersection size j is drawn from the pmf renormalized to the allowed
/// sizes, then the pair is built directly: j common elements, the rest of x
/// and of y from disjoint remainders. Given j, every pair in X_j arises from
/// the same number of choice sequences, so this equals rejection sampling
/// from U conditioned on the allowed sizes.
Instance sample(const DistributionSpec& spec, Rng& rng);
Instance sample(const DistributionSpec& spec, std::uint64_t seed);

/// Where Pin blocks may live: [n^2] as in the problem statement, or all of
/// [2n^2] (the range the Pin-to-PS reduction produces after permuting).
enum class BlockRange { kLower, kFull };

/// Uniformly random valid PinInstance. Requires n >= 4 (n = 4 has one block).
PinInstance sample_pin(std::uint32_t n, Rng& rng, BlockRange range = BlockRange::kLower);
PinInstance sample_pin(std::uint32_t n, std::uint64_t seed, BlockRange range = BlockRange::kLower);

// Serialization ----------------------------------------------------------------

/// {"n", "x", "y"} and {"n", "x", "blocks"}. Parsing validates the shape.
nlohmann::json to_json(const Instance& inst);
nlohmann::json to_json(const PinInstance& inst);
Instance instance_from_json(const nlohmann::json& j);
PinInstance pin_instance_from_json(const nlohmann::json& j);

/// Draws an index from exact weights (need not be normalized).
std::size_t sample_index(const std::vector<Rational>& weights, Rng& rng);

}  // namespace qsep
