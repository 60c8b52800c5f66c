#include "qsep/errors.hpp"
#include "qsep/protocols.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace qsep;
using namespace qsep::protocols;

namespace {

// Oracles below use plain nested loops over Set values, never masks or popcounts.

std::vector<Set> enumerate(std::uint32_t universe, std::uint32_t size) {
  std::vector<Set> out;
  Set cur;
  std::function<void(std::uint32_t)> rec = [&](std::uint32_t next) {
    if (cur.size() == size) {
      out.push_back(cur);
      return;
    }
    for (std::uint32_t e = next; e <= universe; ++e) {
      cur.push_back(e);
      rec(e + 1);
      cur.pop_back();
    }
  };
  rec(1);
  return out;
}

std::size_t overlap(const Set& a, const Set& b) {
  std::size_t c = 0;
  for (auto e : a) c += std::count(b.begin(), b.end(), e);
  return c;
}

std::vector<Rational> brute_size_mass(const Rectangle& r, std::size_t max_j) {
  std::vector<std::uint64_t> counts(max_j + 1, 0);
  for (const auto& x : r.alice)
    for (const auto& y : r.bob) ++counts[overlap(x, y)];
  std::vector<Rational> out;
  for (auto c : counts) out.emplace_back(BigInt(c), BigInt(r.alice.size() * r.bob.size()));
  return out;
}

Rational brute_pair(const Rectangle& r, std::uint32_t a, std::uint32_t b) {
  std::uint64_t c = 0;
  for (const auto& x : r.alice) c += std::count(x.begin(), x.end(), a) && std::count(x.begin(), x.end(), b);
  return Rational(BigInt(c), BigInt(r.alice.size()));
}

bool brute_labeled(const Rectangle& r, const Rational& delta) {
  std::uint64_t good = 0;
  for (const auto& y : r.bob) {
    bool any = false;
    for (std::size_t i = 0; i < y.size(); ++i)
      for (std::size_t j = i + 1; j < y.size(); ++j) any = any || brute_pair(r, y[i], y[j]) >= delta;
    good += any;
  }
  return Rational(BigInt(good), BigInt(r.bob.size())) > Rational(1, 3);
}

// Groups every input pair by transcript and checks closure pair by pair.
std::map<std::string, std::set<std::pair<Set, Set>>> brute_groups(const ProtocolTree& tree) {
  const auto& d = tree.domain();
  std::map<std::string, std::set<std::pair<Set, Set>>> groups;
  for (const auto& x : enumerate(d.universe, d.size_x))
    for (const auto& y : enumerate(d.universe, d.size_y))
      groups[run_protocol(tree, x, y, 0).transcript.key()].insert({x, y});
  return groups;
}

}  // namespace

TEST_CASE("full information tree answers correctly") {
  const auto tree = full_information_tree(Problem::kPiip, 4);
  CHECK(tree.declared_cost() == 7);  // ceil(log2 C(16, 2))
  Rng rng(1);
  for (int k = 0; k < 500; ++k) {
    const auto inst = sample(DistributionSpec::uniform(4), rng);
    const auto run = run_protocol(tree, inst, 0);
    CHECK(run.answer.kind == ProtocolAnswer::Kind::kSet);
    CHECK(member_piip(inst, run.answer.set));
    CHECK(run.transcript.bit_count() == 7);
  }
}

TEST_CASE("constant empty answer is right exactly on X0") {
  const auto tree = constant_tree(Problem::kPiip, 4, {AnswerRule::Kind::kConstSet, {}, {}, 0});
  std::uint64_t right = 0, total = 0;
  for (const auto& x : enumerate(16, 2))
    for (const auto& y : enumerate(16, 4)) {
      right += member_piip({4, x, y}, run_protocol(tree, x, y, 0).answer.set);
      ++total;
    }
  CHECK(Rational(BigInt(right), BigInt(total)) == Rational(11, 20));
}

TEST_CASE("runs are deterministic") {
  Rng rng(2);
  const auto tree = random_tree(Problem::kPs, 4, rng);
  const auto inst = sample(DistributionSpec::uniform(4), 5);
  CHECK(run_protocol(tree, inst, 3).transcript.key() == run_protocol(tree, inst, 3).transcript.key());
}

TEST_CASE("one-leaf tree gives the whole domain") {
  const auto tree = constant_tree(Problem::kPs, 4, {});
  const auto part = extract_rectangles(tree);
  REQUIRE(part.rectangles.size() == 1);
  const auto stats = rectangle_stats(part.rectangles[0], tree.domain());
  CHECK(stats.size_mass == intersection_pmf(4));
}

TEST_CASE("min parity tree splits in two") {
  const auto tree = min_parity_tree(Problem::kPs, 4);
  const auto part = extract_rectangles(tree);
  REQUIRE(part.rectangles.size() == 2);
  for (const auto& r : part.rectangles) {
    CHECK(r.bob.size() == 1820);
    const auto parity = r.alice.front().front() % 2;
    for (const auto& x : r.alice) CHECK(x.front() % 2 == parity);
  }
  CHECK(part.rectangles[0].alice.size() + part.rectangles[1].alice.size() == 120);
}

TEST_CASE("random trees induce rectangles matching brute force") {
  Rng rng(31);
  for (int t = 0; t < 25; ++t) {
    const auto tree = random_tree(Problem::kPs, 4, rng);
    const auto part = extract_rectangles(tree);
    const auto groups = brute_groups(tree);
    REQUIRE(groups.size() == part.rectangles.size());
    for (std::size_t r = 0; r < part.rectangles.size(); ++r) {
      const auto& rect = part.rectangles[r];
      const auto& g = groups.at(part.transcripts[r]);
      CHECK(g.size() == rect.size());
      for (const auto& x : rect.alice)
        for (const auto& y : rect.bob) CHECK(g.count({x, y}) == 1);
    }
  }
}

TEST_CASE("singleton rectangle statistics") {
  const Set x{1, 2}, y{1, 2, 3, 4};
  const auto rect = Rectangle::singleton(x, y);
  const auto stats = rectangle_stats(rect, Domain::for_instances(4));
  CHECK(stats.size_mass[2] == 1);
  CHECK(stats.pair(1, 2) == 1);
  CHECK(stats.pair(2, 1) == 1);
  for (const auto& delta : {Rational(1), Rational(1, 2), Rational(0)}) CHECK(is_delta_labeled(rect, delta, stats));
}

TEST_CASE("delta zero labels every rectangle") {
  Rng rng(4);
  const Domain d = Domain::for_instances(4);
  for (int k = 0; k < 20; ++k) CHECK(is_delta_labeled(random_rectangle(d, 0.2, 0.01, rng), Rational(0), d));
}

TEST_CASE("random rectangle statistics match brute force") {
  Rng rng(12);
  const Domain d = Domain::for_instances(4);
  for (int k = 0; k < 30; ++k) {
    const auto rect = random_rectangle(d, 0.1 + 0.02 * k, 0.01, rng);
    const auto stats = rectangle_stats(rect, d);
    CHECK(stats.size_mass == brute_size_mass(rect, 2));
    for (std::uint32_t a = 1; a <= 16; ++a)
      for (std::uint32_t b = a + 1; b <= 16; ++b) CHECK(stats.pair(a, b) == brute_pair(rect, a, b));
    for (const auto& delta : {Rational(1, 10), Rational(1, 4), Rational(1, 2)})
      CHECK(is_delta_labeled(rect, delta, stats) == brute_labeled(rect, delta));
  }
}

TEST_CASE("label counts fall as delta grows") {
  Rng rng(6);
  const auto tree = random_tree(Problem::kPs, 4, rng, 3);
  const auto part = extract_rectangles(tree);
  std::uint64_t last = ~0ull;
  for (int k = 0; k <= 10; ++k) {
    std::uint64_t count = 0;
    for (const auto& r : part.rectangles) count += is_delta_labeled(r, Rational(k, 10), tree.domain());
    CHECK(count <= last);
    last = count;
  }
}

TEST_CASE("Razborov ratio on the whole domain") {
  const auto dist = RazborovDistribution::product(16, 2, 4);
  const auto r = razborov_ratio(Rectangle::whole(dist.domain), dist);
  // Closed form: hypergeometric masses.
  CHECK(r.mass_x0 == Rational(binomial(14, 4), binomial(16, 4)));
  CHECK(r.mass_x1 == Rational(binomial(2, 1) * binomial(14, 3), binomial(16, 4)));
  REQUIRE(r.ratio);
  CHECK(*r.ratio == r.mass_x1 / r.mass_x0);

  const auto mixed = RazborovDistribution::mixed(2);
  const auto m = razborov_ratio(Rectangle::whole(mixed.domain), mixed);
  CHECK(m.mass_x0 == Rational(3, 4));
  CHECK(m.mass_x1 == Rational(1, 4));

  const auto empty = razborov_ratio(Rectangle{{}, {{1, 2, 3, 4}}}, dist);
  CHECK(empty.mass_x0 == 0);
  CHECK(empty.mass_x1 == 0);
  CHECK_FALSE(empty.ratio);
}

TEST_CASE("Razborov ratio floor over random rectangles") {
  Rng rng(10);
  const auto dist = RazborovDistribution::product(16, 2, 4);
  std::optional<Rational> floor;
  for (int k = 0; k < 200; ++k) {
    const auto r = razborov_ratio(random_rectangle(dist.domain, 0.2, 0.01, rng), dist);
    if (r.ratio && (!floor || *r.ratio < *floor)) floor = *r.ratio;
  }
  REQUIRE(floor);
  CHECK(*floor >= 0);
  MESSAGE("minimum observed ratio: " << qsep::to_string(*floor));
}

TEST_CASE("tree JSON round trip and cost enforcement") {
  Rng rng(8);
  const auto tree = random_tree(Problem::kPs, 4, rng);
  CHECK(ProtocolTree::from_json(tree.to_json()).to_json() == tree.to_json());

  auto j = constant_tree(Problem::kPs, 4, {}).to_json();
  j["nodes"] = nlohmann::json::array({{{"owner", "alice"}, {"depth", 0}, {"feature", "none"}, {"bits", 1},
                                        {"table", {{"*", {{"*", "111"}}}}}}});
  const auto bad = ProtocolTree::from_json(j);
  CHECK_THROWS_AS(run_protocol(bad, Set{1, 2}, Set{1, 2, 3, 4}, 0), CostViolation);
}

TEST_CASE("rectangle JSON round trip") {
  const Rectangle r{{{1, 2}, {3, 4}}, {{1, 2, 3, 4}}};
  const auto back = rectangle_from_json(to_json(r));
  CHECK(back.alice == r.alice);
  CHECK(back.bob == r.bob);
}

TEST_CASE("sampled transcripts cover the exact masses") {
  const auto tree = min_parity_tree(Problem::kPs, 4);
  const auto est = sample_transcripts(tree, 20'000, 4);
  REQUIRE(est.size() == 2);
  const auto part = extract_rectangles(tree);
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double exact = static_cast<double>(part.rectangles[i].size()) / (120.0 * 1820.0);
    CHECK(est[i].lower <= exact);
    CHECK(exact <= est[i].upper);
  }
}
