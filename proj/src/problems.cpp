#include "qsep/problems.hpp"

#include "qsep/errors.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>

namespace qsep {

void validate_size(std::uint32_t n) {
  require(n >= 4 && gf2::is_power_of_two(n), "n must be a power of two and at least 4");
}

int log2_n(std::uint32_t n) { return gf2::log2_exact(n); }

int ps_answer_bits(std::uint32_t n) { return 2 * log2_n(n); }
int pin_answer_bits(std::uint32_t n) { return 2 * log2_n(n) + 1; }

namespace {

void validate_set(const Set& s, std::uint32_t universe, std::size_t size, const char* what) {
  require(s.size() == size, std::string(what) + " has the wrong size");
  require(std::is_sorted(s.begin(), s.end()) && std::adjacent_find(s.begin(), s.end()) == s.end(),
          std::string(what) + " must be sorted without duplicates");
  require(s.empty() || (s.front() >= 1 && s.back() <= universe), std::string(what) + " leaves the ground set");
}

}  // namespace

void Instance::validate() const {
  validate_size(n);
  validate_set(x, universe(), n / 2, "x");
  validate_set(y, universe(), n, "y");
}

void PinInstance::validate() const {
  validate_size(n);
  validate_set(x, universe(), n, "x");
  require(blocks.size() == block_count(), "Pin instance needs n/4 blocks");
  std::vector<bool> used(universe() + 1, false);
  for (const auto& block : blocks) {
    validate_set(block, universe(), n, "block");
    for (auto e : block) {
      require(!used[e], "Pin blocks must be pairwise disjoint");
      used[e] = true;
    }
    require(intersection_size(x, block) == 2, "every Pin block must meet x in exactly two elements");
  }
}

Event Event::pair(std::uint32_t i, std::uint32_t j) {
  require(i != j, "X2(i, j) needs i != j");
  return {Kind::kPair, 0, std::min(i, j), std::max(i, j)};
}

bool Event::holds(const Set& x, const Set& y) const {
  switch (kind) {
    case Kind::kSize:
      return qsep::intersection_size(x, y) == size;
    case Kind::kSingle:
      return set_intersection(x, y) == Set{first};
    case Kind::kPair:
      return set_intersection(x, y) == Set{first, second};
  }
  return false;
}

DistributionSpec DistributionSpec::at_least(std::uint32_t n, std::uint32_t j) {
  DistributionSpec spec{n, {}, {}};
  for (std::uint32_t k = j; k <= n / 2; ++k) spec.sizes.push_back(k);
  return spec;
}

bool member_ps(const Instance& inst, const gf2::BitString& z, const gf2::SigmaEncoding& sigma) {
  require(z.length() == sigma.bits(), "z has the wrong length for the encoding");
  require(!z.is_zero(), "z must be nonzero");
  const Set common = set_intersection(inst.x, inst.y);
  if (common.size() != 2) return true;
  return gf2::inner_product(z, sigma.encode(common[0]) ^ sigma.encode(common[1])) == 0;
}

bool member_ps(const Instance& inst, const gf2::BitString& z) {
  return member_ps(inst, z, gf2::SigmaEncoding(ps_answer_bits(inst.n)));
}

bool member_pin(const PinInstance& inst, const PinAnswer& answer) {
  require(answer.block >= 1 && answer.block <= inst.block_count(), "block index out of range");
  require(answer.z.length() == pin_answer_bits(inst.n), "z must have 2 log n + 1 bits");
  require(!answer.z.is_zero(), "z must be nonzero");
  const Set common = set_intersection(inst.x, inst.blocks[answer.block - 1]);
  require(common.size() == 2, "block does not meet x in two elements");
  const int bits = pin_answer_bits(inst.n);
  return gf2::inner_product(answer.z, gf2::sigma0_encode(common[0], bits) ^ gf2::sigma0_encode(common[1], bits)) == 0;
}

bool member_piip(const Instance& inst, const Set& z) { return set_intersection(inst.x, inst.y) == z; }

std::vector<Rational> intersection_pmf(std::uint32_t universe, std::uint32_t size_x, std::uint32_t size_y) {
  require(size_x <= universe && size_y <= universe, "sizes exceed universe");
  // Fix y; x picks j of y's elements and the rest outside y.
  const BigInt total = binomial(universe, size_x);
  std::vector<Rational> pmf;
  for (std::uint32_t j = 0; j <= std::min(size_x, size_y); ++j) {
    pmf.emplace_back(binomial(size_y, j) * binomial(universe - size_y, size_x - j), total);
  }
  return pmf;
}

std::vector<Rational> intersection_pmf(std::uint32_t n) {
  validate_size(n);
  static std::mutex mutex;
  static std::map<std::uint32_t, std::vector<Rational>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, intersection_pmf(n * n, n / 2, n)).first;
  return it->second;
}

TailCheck tail_bound_check(std::uint32_t n, std::uint32_t t) {
  require(t <= n / 2, "tail index must be at most n/2");
  const auto pmf = intersection_pmf(n);
  TailCheck check;
  for (std::size_t j = t; j < pmf.size(); ++j) check.tail += pmf[j];
  check.bound = Rational(boost::multiprecision::pow(BigInt(3), t), boost::multiprecision::pow(BigInt(4), t));
  check.pass = check.tail <= check.bound;
  return check;
}

std::size_t sample_index(const std::vector<Rational>& weights, Rng& rng) {
  Rational total = 0;
  for (const auto& w : weights) total += w;
  require(total > 0, "weights must have positive total");
  // 53-bit uniform compared exactly against the cumulative weights.
  const auto draw = std::uniform_int_distribution<std::uint64_t>(0, (std::uint64_t{1} << 53) - 1)(rng);
  const Rational u = Rational(BigInt(draw)) * pow2(-53) * total;
  Rational cumulative = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    if (weights[i] > 0 && u < cumulative) return i;
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0) return i;
  }
  return 0;
}

std::pair<Set, Set> sample_pair_with_overlap(std::uint32_t universe, std::uint32_t size_x, std::uint32_t size_y,
                                             std::uint32_t overlap, Rng& rng) {
  require(overlap <= size_x && overlap <= size_y, "overlap exceeds a side");
  require(size_x + size_y - overlap <= universe, "sizes do not fit the universe");
  // Union of the two sets, split into common / x-only / y-only parts.
  const std::uint32_t support = size_x + size_y - overlap;
  Set chosen = random_subset(universe, support, rng);
  std::shuffle(chosen.begin(), chosen.end(), rng);
  Set x(chosen.begin(), chosen.begin() + size_x);
  Set y(chosen.begin(), chosen.begin() + overlap);
  y.insert(y.end(), chosen.begin() + size_x, chosen.end());
  return {make_set(std::move(x)), make_set(std::move(y))};
}

Instance sample(const DistributionSpec& spec, Rng& rng) {
  validate_size(spec.n);
  const auto pmf = intersection_pmf(spec.n);
  std::vector<Rational> weights(pmf.size(), 0);
  if (spec.sizes.empty()) {
    weights = pmf;
  } else {
    for (auto j : spec.sizes) {
      require(j < pmf.size(), "conditioning on an infeasible intersection size");
      weights[j] = pmf[j];
    }
  }
  // Rejection on the predicate; the conditioned sampler keeps it cheap.
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    const auto j = static_cast<std::uint32_t>(sample_index(weights, rng));
    auto [x, y] = sample_pair_with_overlap(spec.n * spec.n, spec.n / 2, spec.n, j, rng);
    Instance inst{spec.n, std::move(x), std::move(y)};
    if (!spec.restriction || spec.restriction(inst)) return inst;
  }
  throw ContractViolation("restriction rejected every sampled instance");
}

Instance sample(const DistributionSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return sample(spec, rng);
}

PinInstance sample_pin(std::uint32_t n, Rng& rng, BlockRange range) {
  validate_size(n);
  const std::uint32_t universe = 2 * n * n;
  const std::uint32_t block_universe = range == BlockRange::kLower ? n * n : universe;
  const std::uint32_t blocks = n / 4;
  Set covered = random_subset(block_universe, std::size_t{blocks} * n, rng);
  std::shuffle(covered.begin(), covered.end(), rng);

  PinInstance inst;
  inst.n = n;
  Set x;
  for (std::uint32_t b = 0; b < blocks; ++b) {
    Set block = make_set(Set(covered.begin() + b * n, covered.begin() + (b + 1) * n));
    Set pair = random_subset_of(block, 2, rng);
    x.insert(x.end(), pair.begin(), pair.end());
    inst.blocks.push_back(std::move(block));
  }
  const Set covered_sorted = make_set(covered);
  std::vector<std::uint32_t> outside;
  outside.reserve(universe - covered_sorted.size());
  for (std::uint32_t e = 1; e <= universe; ++e) {
    if (!contains(covered_sorted, e)) outside.push_back(e);
  }
  Set rest = random_subset_of(outside, n - 2 * blocks, rng);
  x.insert(x.end(), rest.begin(), rest.end());
  inst.x = make_set(std::move(x));
  return inst;
}

PinInstance sample_pin(std::uint32_t n, std::uint64_t seed, BlockRange range) {
  Rng rng(seed);
  return sample_pin(n, rng, range);
}

nlohmann::json to_json(const Instance& inst) { return {{"n", inst.n}, {"x", inst.x}, {"y", inst.y}}; }

nlohmann::json to_json(const PinInstance& inst) {
  return {{"n", inst.n}, {"x", inst.x}, {"blocks", inst.blocks}};
}

Instance instance_from_json(const nlohmann::json& j) {
  Instance inst{j.at("n").get<std::uint32_t>(), make_set(j.at("x").get<std::vector<std::uint32_t>>()),
                make_set(j.at("y").get<std::vector<std::uint32_t>>())};
  inst.validate();
  return inst;
}

PinInstance pin_instance_from_json(const nlohmann::json& j) {
  PinInstance inst;
  inst.n = j.at("n").get<std::uint32_t>();
  inst.x = make_set(j.at("x").get<std::vector<std::uint32_t>>());
  for (const auto& b : j.at("blocks")) inst.blocks.push_back(make_set(b.get<std::vector<std::uint32_t>>()));
  inst.validate();
  return inst;
}

}  // namespace qsep
