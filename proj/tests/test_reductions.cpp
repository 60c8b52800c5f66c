#include "qsep/errors.hpp"
#include "qsep/reductions.hpp"

#include <doctest.h>

#include <cmath>

using namespace qsep;
using namespace qsep::reductions;

namespace {

// Oracle for PS answers of the Pin reduction: relabel the pair by sigma1,
// write both as (2 log n + 1)-bit numbers and take the parity against z.
bool oracle_in2ii(const Instance& inst, const In2iiAnswer& a) {
  const Set pair = set_intersection(inst.x, inst.y);
  if (pair.size() != 2) return !a.z.is_zero();
  const std::uint64_t d = (a.sigma1[pair[0] - 1] - 1) ^ (a.sigma1[pair[1] - 1] - 1);
  return !a.z.is_zero() && __builtin_popcountll(d & a.z.value()) % 2 == 0;
}

double sigma(double p, double trials) { return std::sqrt(p * (1 - p) / trials); }

}  // namespace

TEST_CASE("padded Pin instance has the stated shape") {
  Rng rng(1);
  for (std::uint32_t n : {8u, 16u}) {
    const auto inst = sample(DistributionSpec::exactly(n, 2), rng);
    const auto pin = in2ii_padded_instance(inst);
    pin.validate();
    CHECK(pin.blocks.front() == inst.y);
    for (std::uint32_t e = n * n + 1; e <= n * n + n / 2; ++e) CHECK(contains(pin.x, e));
    for (std::uint32_t j = 1; j < n / 4; ++j) {
      Set expected;
      for (std::uint32_t k = 0; k < n; ++k) expected.push_back(n * n + j + k * (n / 4));
      CHECK(pin.blocks[j] == expected);
    }
  }
}

TEST_CASE("identity permutations keep y in the first block") {
  const PerfectPinSolver solver;
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto inst = sample(DistributionSpec::exactly(8, 2), rng);
    const auto res = reduce_in2ii(inst, solver, rng, {true, false});
    CHECK(res.target_block == 1);
    CHECK(res.image == in2ii_padded_instance(inst));
    REQUIRE(res.solver_answer);
    CHECK(res.answer.has_value() == (res.solver_answer->block == 1));
  }
}

TEST_CASE("Pin reduction answers at rate 4/n with a perfect solver") {
  const PerfectPinSolver perfect;
  const RefusingPinSolver refuse;
  Rng rng(3);
  const int trials = 40'000;
  int answered = 0;
  for (int k = 0; k < trials; ++k) {
    const auto inst = sample(DistributionSpec::exactly(8, 2), rng);
    const auto res = reduce_in2ii(inst, perfect, rng);
    if (res.answer) {
      ++answered;
      CHECK(in2ii_answer_correct(inst, *res.answer));
      CHECK(oracle_in2ii(inst, *res.answer));
    }
    CHECK_FALSE(reduce_in2ii(inst, refuse, rng).answer);
  }
  CHECK(std::abs(answered / double(trials) - 0.5) <= 3 * sigma(0.5, trials));
}

TEST_CASE("answer check agrees with the oracle on arbitrary answers") {
  Rng rng(4);
  for (int k = 0; k < 2000; ++k) {
    const auto inst = sample(DistributionSpec::exactly(8, 2), rng);
    In2iiAnswer a{random_permutation(128, rng), gf2::BitString(7, 1 + rng() % 127)};
    CHECK(in2ii_answer_correct(inst, a) == oracle_in2ii(inst, a));
  }
}

TEST_CASE("Pin reduction rejects small n and wrong overlaps") {
  const PerfectPinSolver solver;
  Rng rng(5);
  CHECK_THROWS_AS(reduce_in2ii(sample(DistributionSpec::exactly(4, 2), rng), solver, rng), ContractViolation);
  CHECK_THROWS_AS(reduce_in2ii(sample(DistributionSpec::exactly(8, 1), rng), solver, rng), ContractViolation);
}

TEST_CASE("trace records stages when asked") {
  const QuantumPinSolver solver;
  const auto inst = sample(DistributionSpec::exactly(8, 2), 6);
  const auto quiet = reduce_in2ii(inst, solver, 6);
  CHECK(quiet.trace.stages.empty());
  CHECK_FALSE(quiet.trace.verdict.empty());
  const auto traced = reduce_in2ii(inst, solver, 6, {false, true});
  CHECK_FALSE(traced.trace.stages.empty());
  CHECK(traced.trace.to_json().contains("verdict"));
  CHECK(traced.answer.has_value() == quiet.answer.has_value());
}

TEST_CASE("derandomization") {
  const PerfectPinSolver perfect;
  const auto r = derandomize_in2ii(perfect, 8, 0.01, 10, 200, 1);
  CHECK(r.found);
  CHECK(r.seeds_tried == 1);
  CHECK(r.error_rate == 0.0);

  const RefusingPinSolver refuse;
  const auto none = derandomize_in2ii(refuse, 8, 0.01, 5, 100, 1);
  CHECK_FALSE(none.found);
  CHECK(none.seeds_tried == 5);

  const QuantumPinSolver quantum;
  const auto q = derandomize_in2ii(quantum, 8, 0.01, 200, 2000, 2);
  CHECK(q.found);
  CHECK(q.answer_rate >= q.threshold);
}

TEST_CASE("j0 distribution and threshold") {
  const auto d4 = ii2iip_j0_distribution(4);
  CHECK(d4 == std::vector<Rational>{0, 0, 1});
  const auto d8 = ii2iip_j0_distribution(8);
  const auto pmf = intersection_pmf(8);
  Rational sum = 0;
  for (auto& p : d8) sum += p;
  CHECK(sum == 1);
  CHECK(d8[3] / d8[2] == pmf[3] / pmf[2]);
  for (double gamma : {1.0, 0.5}) {
    for (const Rational& delta : {Rational(1, 16), Rational(1, 49)}) {
      const double exact = 3 * std::log2(312 / (gamma * to_double(delta)));
      CHECK(ii2iip_threshold(gamma, delta) == static_cast<std::uint32_t>(std::ceil(exact)));
    }
  }
}

TEST_CASE("PS to Piip reduction never answers wrongly") {
  Rng rng(7);
  for (const char* name : {"perfect", "adversarial", "quantum"}) {
    const auto solver = make_ps_solver(name);
    int answered = 0;
    for (int k = 0; k < 3000; ++k) {
      const auto inst = sample(DistributionSpec::exactly(4, 2), rng);
      const auto res = reduce_ii2iip(inst, *solver, rng);
      CHECK(res.j0 == 2);
      if (res.answer) {
        ++answered;
        CHECK(*res.answer == set_intersection(inst.x, inst.y));
      }
      if (res.image) {
        CHECK(res.image->overlap() == res.j0);
        res.image->validate();
      }
    }
    if (std::string(name) == "perfect") CHECK(answered == 3000);
    if (std::string(name) == "adversarial") CHECK(answered == 0);
  }
}

TEST_CASE("PS to Piip with a tree solver") {
  const TreePsSolver solver(protocols::full_information_tree(protocols::Problem::kPs, 4));
  Rng rng(8);
  for (int k = 0; k < 500; ++k) {
    const auto inst = sample(DistributionSpec::exactly(4, 2), rng);
    const auto res = reduce_ii2iip(inst, solver, rng);
    REQUIRE(res.answer);
    CHECK(member_piip(inst, *res.answer));
  }
}

TEST_CASE("full information solver answers often once j0 > 2") {
  const PerfectPsSolver solver;
  Rng rng(9);
  int reached = 0, answered = 0;
  for (int k = 0; k < 3000; ++k) {
    const auto inst = sample(DistributionSpec::exactly(8, 2), rng);
    const auto res = reduce_ii2iip(inst, solver, rng);
    if (res.image) {
      ++reached;
      answered += res.answer.has_value();
    }
    if (res.answer) CHECK(member_piip(inst, *res.answer));
  }
  REQUIRE(reached > 0);
  // The singleton rectangle names a pair of x~ ∩ y; it is the true pair with
  // probability at least 1 / C(j0, 2) >= 1 / C(4, 2).
  CHECK(answered / double(reached) >= 1.0 / 6.0);
}

TEST_CASE("padding with t = i0 always says zero on X0") {
  const PerfectPiipSolver solver(2);
  Rng rng(10);
  const std::uint32_t n = 8, i0 = 2, m = n * n - i0;
  for (int k = 0; k < 2000; ++k) {
    auto [xp, yp] = sample_pair_with_overlap(m, n / 2 - i0, n - i0, 0, rng);
    const auto res = reduce_iip_padding(n, xp, yp, i0, 2, solver, rng);
    CHECK(res.verdict == Verdict::kZero);
    res.padded.validate();
    CHECK(res.padded.overlap() == i0);
  }
}

TEST_CASE("padding rate on X1 is 1 - t/(i0+1)") {
  Rng rng(11);
  const std::uint32_t n = 8, m = n * n - 3;
  const PerfectPiipSolver solver(1);
  const int trials = 40'000;
  int zero = 0;
  for (int k = 0; k < trials; ++k) {
    auto [xp, yp] = sample_pair_with_overlap(m, n / 2 - 3, n - 3, 1, rng);
    zero += reduce_iip_padding(n, xp, yp, 3, 1, solver, rng).verdict == Verdict::kZero;
  }
  CHECK(std::abs(zero / double(trials) - 0.75) <= 3 * sigma(0.75, trials));
}

TEST_CASE("repetition wrapper") {
  const auto flip = [](Rng& rng) { return std::bernoulli_distribution(0.6)(rng) ? Verdict::kZero : Verdict::kRefuse; };
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng a(s);
    CHECK(repeat_iip(1, flip, s) == flip(a));
  }
  CHECK(repeat_iip(5, [](Rng&) { return Verdict::kRefuse; }, 1) == Verdict::kRefuse);
  CHECK(repeat_iip(5, [](Rng&) { return Verdict::kZero; }, 1) == Verdict::kZero);

  // Measure p first, then compare the l-fold rate with p^l.
  const int trials = 50'000;
  Rng rng(12);
  int single = 0, triple = 0;
  for (int k = 0; k < trials; ++k) single += flip(rng) == Verdict::kZero;
  for (int k = 0; k < trials; ++k) triple += repeat_iip(3, flip, rng) == Verdict::kZero;
  const double p = single / double(trials), expect = p * p * p;
  CHECK(std::abs(triple / double(trials) - expect) <= 3 * sigma(expect, trials) + 3 * 3 * p * p * sigma(p, trials));
}

TEST_CASE("embedding invariants") {
  Rng rng(13);
  for (std::uint32_t l : {1u, 2u, 3u}) {
    const std::uint32_t m = 4 * l - 1, n = 40, k2 = l + 3;
    for (int k = 0; k < 2000; ++k) {
      for (std::uint32_t j = 0; j <= 1; ++j) {
        auto [xp, yp] = sample_pair_with_overlap(m, l, l, j, rng);
        const auto e = embed_razlem(xp, yp, n, k2, rng);
        CHECK(intersection_size(e.x, e.y) == j);
        CHECK(e.x.size() == l);
        CHECK(e.y.size() == k2);
        CHECK(e.r.injection.size() == m);
        CHECK(e.x == embed_alice(xp, e.r));
        CHECK(e.y == embed_bob(yp, e.r));
        for (auto b : e.r.beta) CHECK(std::find(e.r.injection.begin(), e.r.injection.end(), b) == e.r.injection.end());
      }
    }
  }
  CHECK_THROWS_AS(embed_razlem({1}, {2}, 3, 2, rng), ContractViolation);
}
