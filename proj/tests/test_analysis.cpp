#include "qsep/analysis.hpp"
#include "qsep/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace qsep;
using namespace qsep::analysis;

namespace {

const ClaimReport* find(const std::vector<ClaimReport>& claims, const std::string& id) {
  for (const auto& c : claims)
    if (c.id == id) return &c;
  return nullptr;
}

bool none_failed(const std::vector<ClaimReport>& claims) {
  for (const auto& c : claims)
    if (c.verdict == Verdict::kFail) return false;
  return true;
}

}  // namespace

TEST_CASE("decimal and fraction text parse exactly") {
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("0.0625") == Rational(1, 16));
  CHECK(parse_rational("010") == Rational(10));
  CHECK(parse_rational("007/014") == Rational(1, 2));
  CHECK(parse_rational("-0.5") == Rational(-1, 2));
  CHECK(parse_rational("25e-2") == Rational(1, 4));
  CHECK(parse_rational("0") == Rational(0));
  CHECK(parse_rational("000") == Rational(0));
  CHECK_THROWS_AS(parse_rational("0x10"), ContractViolation);
  CHECK_THROWS_AS(parse_rational("1/0"), ContractViolation);
}

TEST_CASE("Wilson interval by hand") {
  // 95%, 40 of 100: center (p + z^2/2n) / (1 + z^2/n), half width z sqrt(p(1-p)/n + z^2/4n^2) / (1 + z^2/n).
  const double z = 1.959963984540054, n = 100, p = 0.4;
  const double denom = 1 + z * z / n;
  const double center = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  const auto e = Estimate::from_counts(40, 100, 0);
  CHECK(e.interval.lower == doctest::Approx(center - half).epsilon(1e-9));
  CHECK(e.interval.upper == doctest::Approx(center + half).epsilon(1e-9));
  const auto zero = Estimate::from_counts(0, 1000, 0);
  CHECK(zero.interval.lower == 0.0);
  CHECK(zero.interval.upper > 0.0);
}

TEST_CASE("Monte Carlo chunks are seeded independently") {
  const auto trial = [](Rng& rng) { return rng() % 3 == 0; };
  const std::uint64_t trials = 3000;
  std::uint64_t hits = 0;
  for (std::uint64_t c = 0; c * kChunkSize < trials; ++c) {
    Rng rng(derive_seed(9, c));
    for (std::uint64_t i = c * kChunkSize; i < std::min(trials, (c + 1) * kChunkSize); ++i) hits += trial(rng);
  }
  const auto e = monte_carlo(trials, 9, trial);
  CHECK(e.successes == hits);
  CHECK(monte_carlo(trials, 9, trial).successes == hits);
  CHECK_THROWS_AS(monte_carlo(0, 9, trial), ContractViolation);
}

TEST_CASE("report round trips byte for byte") {
  Report r;
  r.seed = 18446744073709551615ull;
  r.version = library_version();
  r.claims.push_back({"a,b", "say \"hi\"", "line\nbreak", stats::Interval{0.1, 1.0 / 3.0}, Verdict::kPass, "x"});
  r.claims.push_back({"plain", ">= 1/3", "11/20", std::nullopt, Verdict::kInformational, "exact rational"});
  r.claims.push_back({"f", "", "", stats::Interval{1e-300, 0.30000000000000004}, Verdict::kFail, ""});

  const auto json_text = r.to_json().dump();
  CHECK(Report::from_json(nlohmann::json::parse(json_text)).to_json().dump() == json_text);
  const auto csv = r.to_csv();
  const auto back = Report::from_csv(csv);
  CHECK(back.to_csv() == csv);
  CHECK(back.claims[0].id == "a,b");
  CHECK(back.claims[0].measured == "line\nbreak");
  CHECK(back.claims[2].interval->upper == 0.30000000000000004);
  CHECK(back.to_json() == r.to_json());
  CHECK(r.to_json()["meta"]["timing"].is_null());
  CHECK_FALSE(r.all_pass());

  r.seconds = 1.25;
  CHECK(Report::from_csv(r.to_csv()).seconds == 1.25);
  CHECK(Report::from_json(r.to_json()).to_json() == r.to_json());
  CHECK_THROWS_AS(Report::from_csv("id,expected\n"), ContractViolation);
}

TEST_CASE("c_X at n = 4 reports X2 as informational") {
  const auto claims = validate_claim_cx(4);
  CHECK(find(claims, "cX.X0@n=4")->verdict == Verdict::kPass);
  CHECK(find(claims, "cX.X1@n=4")->verdict == Verdict::kPass);
  CHECK(find(claims, "cX.X2@n=4")->verdict == Verdict::kInformational);
  CHECK(find(claims, "cX.X2@n=4")->measured == "1/20");
  CHECK(none_failed(claims));
  CHECK(find(claims, "cX.tail@n=4,t=2") != nullptr);
  CHECK(find(claims, "cX.tail@n=4,t=3") == nullptr);
}

TEST_CASE("c_X threshold sweep") {
  const std::vector<std::uint32_t> sizes{4, 8, 16, 32, 64};
  for (auto n : sizes) CHECK(none_failed(validate_claim_cx(n)));
  const auto th = claim_cx_thresholds(sizes);
  REQUIRE(th.size() == 3);
  // Oracle: walk the exact pmfs directly.
  const std::vector<Rational> bounds{Rational(1, 3), Rational(1, 6), Rational(1, 13)};
  for (std::size_t k = 0; k < 3; ++k) {
    std::optional<std::uint32_t> smallest;
    for (auto it = sizes.rbegin(); it != sizes.rend() && intersection_pmf(*it)[k] >= bounds[k]; ++it) smallest = *it;
    CHECK(th[k].threshold == smallest);
  }
  CHECK(th[0].threshold == 4u);
  CHECK(th[1].threshold == 4u);
  CHECK_FALSE(th[2].threshold);
  const auto sweep = validate_claim_cx_sweep(sizes);
  CHECK(find(sweep, "cX.X0.threshold")->verdict == Verdict::kPass);
  CHECK(find(sweep, "cX.X2.threshold")->verdict == Verdict::kFail);
}

TEST_CASE("quantum validation") {
  CHECK(none_failed(validate_quantum(8, 1, 3)));
  const auto four = validate_quantum(4, 1);
  CHECK(find(four, "quantum.answer_prob@n=4")->measured == "15/32");
  CHECK(none_failed(measure_quantum_sampled(8, 1'000'000, 3)));
  CHECK(none_failed(measure_repetition(8, 0.01, 20'000, 4)));
  CHECK_THROWS_AS(validate_quantum(128, 1), ContractViolation);
}

TEST_CASE("reduction measurements") {
  const reductions::QuantumPinSolver quantum;
  CHECK(none_failed(measure_in2ii(8, quantum, 20'000, 5)));
  CHECK(none_failed(measure_iip_padding(8, 2, 2, 20'000, 6)));
  const reductions::PerfectPsSolver perfect;
  const auto ii = measure_ii2iip(4, perfect, 20'000, 7);
  CHECK(none_failed(ii));
  CHECK(find(ii, "ii2iip.image_chi2@n=4,solver=perfect") != nullptr);
  CHECK(none_failed(measure_embedding(1, 6, 2, 20'000, 8)));
}

TEST_CASE("Chernoff experiment") {
  // m = 1: the single-variable tail Pr[alpha B >= 1.5 mu] = mu / alpha.
  const auto one = chernoff_rate(1, 1.0, 0.3, 0.5, 100'000, 1);
  CHECK(std::abs(one.rate.point - 0.3) <= 3 * std::sqrt(0.21 / 100'000));
  // mu = alpha: the average never exceeds alpha.
  for (std::uint32_t m : {1u, 4u, 16u}) CHECK(chernoff_rate(m, 2.0, 2.0, 0.5, 1000, m).rate.successes == 0);

  std::vector<ChernoffPoint> points;
  for (std::uint32_t m : {4u, 8u, 16u, 32u}) points.push_back(chernoff_rate(m, 1.0, 0.3, 0.5, 100'000, m));
  for (std::size_t i = 1; i < points.size(); ++i) CHECK(points[i].rate.point < points[i - 1].rate.point);
  const auto slope = chernoff_slope(points);
  REQUIRE(slope);
  CHECK(*slope < 0);
  CHECK(chernoff_empirical(8, 1.0, 0.3, 1000, 1).verdict == Verdict::kInformational);
  CHECK_THROWS_AS(chernoff_rate(4, 1.0, 2.0, 0.5, 10, 1), ContractViolation);
}

TEST_CASE("experiments") {
  const auto empty = run_experiment("empty", {5, 10});
  CHECK(empty.claims.empty());
  CHECK(empty.seed == 5);
  CHECK(empty.all_pass());

  const auto exact = run_experiment("all-exact", {5, 10});
  for (const auto& c : exact.claims) {
    CHECK(c.provenance != "monte carlo, Wilson 95%");
    CHECK(c.provenance != "monte carlo count");
    // The X2 bound has no threshold among the tested sizes.
    CHECK((c.verdict != Verdict::kFail) == (c.id != "cX.X2.threshold"));
  }

  const auto demo = run_experiment("separation-demo", {5, 20'000});
  CHECK(demo.all_pass());
  CHECK(find(demo.claims, "separation.quantum.cost@n=8")->measured == "7");
  CHECK_THROWS_AS(run_experiment("nope", {}), ContractViolation);
}
