#include "qsep/errors.hpp"
#include "qsep/quantum.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace qsep;
using gf2::BitString;

namespace {

// Oracle: naive state vector with an O(N^2) Hadamard, one block at a time.
// Returns Pr[block i and readout z] for every i >= 1 and z.
std::vector<std::vector<double>> naive_readouts(const PinInstance& inst) {
  const std::size_t dim = 2 * inst.n * inst.n;
  const double amp = 1.0 / std::sqrt(static_cast<double>(inst.x.size()));
  std::vector<std::vector<double>> out;
  for (const auto& block : inst.blocks) {
    std::vector<double> projected(dim, 0.0);
    for (auto e : inst.x)
      if (contains(block, e)) projected[e - 1] = amp;
    std::vector<double> probs(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += (__builtin_popcountll(j & k) % 2 ? -1.0 : 1.0) * projected[k];
      s /= std::sqrt(static_cast<double>(dim));
      probs[j] = s * s;
    }
    out.push_back(probs);
  }
  return out;
}

}  // namespace

TEST_CASE("block law is exact") {
  for (std::uint32_t n : {4u, 8u, 16u, 32u}) {
    const auto dist = quantum::run_exact(sample_pin(n, 100 + n));
    const auto& p = dist.block_probabilities();
    CHECK(p.size() == n / 4 + 1);
    CHECK(p[0] == Rational(1, 2));
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] == Rational(2, n));
    CHECK(dist.total() == 1);
  }
}

TEST_CASE("answer probability matches the closed form") {
  CHECK(quantum::closed_form_answer_probability(4) == Rational(15, 32));
  for (std::uint32_t n : {4u, 8u, 16u}) {
    const auto dist = quantum::run_exact(sample_pin(n, n));
    // Independent count: each block answers unless the uniform orthogonal readout is 0.
    const Rational orth(BigInt(1) << (2 * log2_n(n)));
    const Rational expected = Rational(1, 2) * (Rational(1) - Rational(1) / orth);
    CHECK(dist.answer_probability() == expected);
  }
}

TEST_CASE("readout agrees with a naive simulation") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto inst = sample_pin(4, seed);
    const auto dist = quantum::run_exact(inst);
    const auto naive = naive_readouts(inst);
    for (std::uint32_t i = 1; i <= inst.block_count(); ++i) {
      const auto& exact = dist.readout_probabilities(i);
      for (std::size_t z = 0; z < exact.size(); ++z)
        CHECK(to_double(exact[z]) == doctest::Approx(naive[i - 1][z]).epsilon(1e-12));
    }
  }
}

TEST_CASE("readout is uniform on the orthogonal complement and error free") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = sample_pin(8, seed);
    const auto dist = quantum::run_exact(inst);
    CHECK(dist.conditional_readout_uniform(inst));
    for (const auto& [outcome, p] : dist.support()) {
      CHECK(p > 0);
      if (outcome.answered()) CHECK(member_pin(inst, outcome.answer()));
    }
  }
}

TEST_CASE("sampled runs match the exact law") {
  const auto inst = sample_pin(8, 5);
  quantum::QuantumSampler sampler(inst);
  Rng rng(77);
  const std::uint64_t trials = 1'000'000;
  std::uint64_t rejects = 0, bad = 0;
  for (std::uint64_t k = 0; k < trials; ++k) {
    const auto o = sampler.draw(rng);
    rejects += o.block == 0;
    if (o.answered() && !member_pin(inst, o.answer())) ++bad;
  }
  CHECK(bad == 0);
  CHECK(std::abs(static_cast<double>(rejects) / trials - 0.5) <= 3 * std::sqrt(0.25 / trials));
}

TEST_CASE("sampled runs are reproducible") {
  const auto inst = sample_pin(8, 5);
  const auto a = quantum::run_sampled(inst, 42), b = quantum::run_sampled(inst, 42);
  CHECK(a.block == b.block);
  CHECK(a.readout == b.readout);
}

TEST_CASE("repetition count and cost") {
  CHECK(quantum::repetitions_for(1.0) == 1);
  CHECK(quantum::repetitions_for(0.01) == 12);
  CHECK(quantum::qubit_cost(4) == 5);
  CHECK(quantum::qubit_cost(1024) == 21);
  CHECK(quantum::qubit_cost(8, 12) == 12 * 7);
  CHECK_THROWS_AS(quantum::repetitions_for(0.0), ContractViolation);

  const auto inst = sample_pin(8, 9);
  const auto one = quantum::run_repeated(inst, 1.0, 3);
  CHECK(one.repetitions == 1);
  CHECK(one.qubits == 7);
}

TEST_CASE("repetition keeps refusals below epsilon") {
  const auto inst = sample_pin(8, 21);
  Rng rng(8);
  const std::uint64_t trials = 100'000;
  std::uint64_t refused = 0;
  for (std::uint64_t k = 0; k < trials; ++k) {
    const auto r = quantum::run_repeated(inst, 0.01, rng);
    if (!r.outcome.answered()) ++refused;
    else CHECK(member_pin(inst, r.outcome.answer()));
  }
  CHECK(static_cast<double>(refused) / trials <= 0.01);
}

TEST_CASE("PS-shaped protocol never answers wrongly") {
  Rng rng(4);
  for (int k = 0; k < 5000; ++k) {
    const auto inst = sample(DistributionSpec::exactly(4, 2), rng);
    if (const auto z = quantum::run_ps_sampled(inst, rng)) {
      CHECK(member_ps(inst, *z));
      CHECK(quantum::ps_outcome_possible(inst.x, inst.y, *z));
    }
  }
}
