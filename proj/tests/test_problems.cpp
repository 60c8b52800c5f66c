#include "qsep/errors.hpp"
#include "qsep/problems.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

using namespace qsep;
using gf2::BitString;

namespace {

// Oracle: count x-sets against a fixed y by enumeration.
std::vector<Rational> enumerated_pmf(std::uint32_t n) {
  const std::uint32_t u = n * n;
  Set y;
  for (std::uint32_t e = 1; e <= n; ++e) y.push_back(e);
  const auto ymask = to_mask(y);
  std::vector<std::uint64_t> counts(n / 2 + 1, 0);
  std::uint64_t total = 0;
  for (auto mask : all_subsets_mask(u, n / 2)) {
    ++counts[__builtin_popcountll(mask & ymask)];
    ++total;
  }
  std::vector<Rational> out;
  for (auto c : counts) out.emplace_back(BigInt(c), BigInt(total));
  return out;
}

int hand_parity(std::uint64_t a, std::uint64_t b) { return __builtin_popcountll(a & b) & 1; }

}  // namespace

TEST_CASE("pmf sums to one and matches enumeration") {
  for (std::uint32_t n : {4u, 8u}) {
    const auto pmf = intersection_pmf(n);
    Rational sum = 0;
    for (const auto& p : pmf) sum += p;
    CHECK(sum == 1);
    CHECK(pmf == enumerated_pmf(n));
  }
  const auto pmf4 = intersection_pmf(4);
  CHECK(pmf4[0] == Rational(11, 20));
  CHECK(pmf4[1] == Rational(2, 5));
  CHECK(pmf4[2] == Rational(1, 20));
}

TEST_CASE("pmf at n = 16 against the three constants") {
  const auto pmf = intersection_pmf(16);
  CHECK(pmf[0] >= Rational(1, 3));
  CHECK(pmf[1] >= Rational(1, 6));
  // X2 stays below 1/13: the mass tends to e^{-1/2}/8 ~ 0.0758 from below.
  CHECK(pmf[2] == Rational(732998182, 10040776845));
  CHECK(pmf[2] < Rational(1, 13));
}

TEST_CASE("X2 mass increases with n but never reaches 1/13") {
  Rational last = 0;
  for (std::uint32_t n : {4u, 8u, 16u, 32u, 64u, 128u}) {
    const auto p2 = intersection_pmf(n)[2];
    CHECK(p2 > last);
    CHECK(p2 < Rational(1, 13));
    CHECK(to_double(p2) < std::exp(-0.5) / 8);
    last = p2;
  }
}

TEST_CASE("tail bound") {
  const auto t0 = tail_bound_check(4, 0);
  CHECK(t0.tail == 1);
  CHECK(t0.bound == 1);
  CHECK(t0.pass);
  const auto t2 = tail_bound_check(4, 2);
  CHECK(t2.tail == Rational(1, 20));
  CHECK(t2.bound == Rational(9, 16));
  CHECK(t2.pass);
  CHECK(tail_bound_check(16, 4).pass);
  CHECK_THROWS_AS(tail_bound_check(4, 3), ContractViolation);
}

TEST_CASE("PS membership") {
  Instance one{4, {1, 5}, {1, 2, 3, 4}};
  for (std::uint64_t z = 1; z < 16; ++z) CHECK(member_ps(one, BitString(4, z)));

  Instance two{4, {1, 2}, {1, 2, 3, 4}};
  CHECK_FALSE(member_ps(two, BitString::parse("0001")));
  CHECK(member_ps(two, BitString::parse("1000")));

  // Including z = 0, half of all 16 strings satisfy the inner product clause.
  const std::uint64_t d = 0b0000 ^ 0b0001;
  int count = 0;
  for (std::uint64_t z = 0; z < 16; ++z) count += hand_parity(z, d) == 0;
  CHECK(count == 8);
  int lib = 1;  // z = 0 is orthogonal but not a legal answer
  for (std::uint64_t z = 1; z < 16; ++z) lib += member_ps(two, BitString(4, z));
  CHECK(lib == 8);
  CHECK_THROWS_AS(member_ps(two, BitString(3, 1)), ContractViolation);
}

TEST_CASE("Pin membership") {
  Rng rng(17);
  const auto inst = sample_pin(8, rng);
  const int bits = pin_answer_bits(8);
  for (std::uint32_t i = 1; i <= inst.block_count(); ++i) {
    const Set pair = set_intersection(inst.x, inst.blocks[i - 1]);
    REQUIRE(pair.size() == 2);
    const std::uint64_t a = pair[0] - 1, b = pair[1] - 1, d = a ^ b;
    // A single 1 where a and b agree.
    for (int pos = 0; pos < bits; ++pos) {
      const std::uint64_t bit = std::uint64_t{1} << pos;
      if ((d & bit) == 0) CHECK(member_pin(inst, {i, BitString(bits, bit)}));
    }
    CHECK(member_pin(inst, {i, BitString(bits, d)}) == (__builtin_popcountll(d) % 2 == 0));
  }

  // Brute force over every answer.
  std::uint64_t hits = 0, oracle = 0;
  for (std::uint32_t i = 1; i <= inst.block_count(); ++i) {
    const Set pair = set_intersection(inst.x, inst.blocks[i - 1]);
    const std::uint64_t d = (pair[0] - 1) ^ (pair[1] - 1);
    for (std::uint64_t z = 1; z < (std::uint64_t{1} << bits); ++z) {
      hits += member_pin(inst, {i, BitString(bits, z)});
      oracle += hand_parity(z, d) == 0;
    }
  }
  CHECK(hits == oracle);
  CHECK(hits == inst.block_count() * ((std::uint64_t{1} << (bits - 1)) - 1));
}

TEST_CASE("Piip membership") {
  Instance inst{4, {1, 2}, {2, 3, 4, 5}};
  CHECK(member_piip(inst, {2}));
  CHECK_FALSE(member_piip(inst, {}));
  CHECK_FALSE(member_piip(inst, {1, 2}));
  Instance disjoint{4, {1, 6}, {2, 3, 4, 5}};
  CHECK(member_piip(disjoint, {}));
}

TEST_CASE("conditioned sampling respects the sizes") {
  Rng rng(1);
  for (int k = 0; k < 2000; ++k) {
    const auto inst = sample(DistributionSpec::exactly(8, 2), rng);
    inst.validate();
    CHECK(inst.overlap() == 2);
  }
  for (int k = 0; k < 500; ++k) CHECK(sample(DistributionSpec::at_least(8, 2), rng).overlap() >= 2);
  CHECK(sample(DistributionSpec::uniform(8), 99) == sample(DistributionSpec::uniform(8), 99));
}

TEST_CASE("sampled intersection sizes follow the pmf") {
  Rng rng(2024);
  const std::uint64_t trials = 1'000'000;
  std::vector<std::uint64_t> counts(3, 0);
  for (std::uint64_t k = 0; k < trials; ++k) ++counts[sample(DistributionSpec::uniform(4), rng).overlap()];
  const auto pmf = intersection_pmf(4);
  for (std::size_t j = 0; j < 3; ++j) {
    const double p = to_double(pmf[j]);
    const double sigma = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(static_cast<double>(counts[j]) / trials - p) <= 3 * sigma);
  }
}

TEST_CASE("Pin instances are valid") {
  Rng rng(3);
  for (int k = 0; k < 10'000; ++k) {
    const auto inst = sample_pin(8, rng, k % 2 ? BlockRange::kFull : BlockRange::kLower);
    inst.validate();
    std::set<std::uint32_t> seen;
    for (const auto& b : inst.blocks) {
      CHECK(intersection_size(inst.x, b) == 2);
      for (auto e : b) CHECK(seen.insert(e).second);
    }
  }
  CHECK_THROWS_AS(sample_pin(6, rng), ContractViolation);
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS((Instance{4, {1, 2, 3}, {1, 2, 3, 4}}.validate()), ContractViolation);
  CHECK_THROWS_AS((Instance{4, {1, 17}, {1, 2, 3, 4}}.validate()), ContractViolation);
  CHECK_THROWS_AS(validate_size(12), ContractViolation);
}

TEST_CASE("JSON round trip against golden files") {
  for (const char* name : {"instance_n4.json", "pin_n8.json"}) {
    std::ifstream in(std::string(QSEP_TEST_DATA) + "/" + name);
    REQUIRE(in.good());
    const auto j = nlohmann::json::parse(in);
    if (j.contains("blocks")) CHECK(to_json(pin_instance_from_json(j)) == j);
    else CHECK(to_json(instance_from_json(j)) == j);
  }
  auto bad = to_json(Instance{4, {1, 2}, {1, 2, 3, 4}});
  bad["x"] = {1, 2, 3};
  CHECK_THROWS_AS(instance_from_json(bad), ContractViolation);
}
