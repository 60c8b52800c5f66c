#include "qsep/errors.hpp"
#include "qsep/protocols.hpp"
#include "qsep/stats.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

namespace qsep::protocols {

using nlohmann::json;

bool Rectangle::contains(const Set& x, const Set& y) const {
  return std::find(alice.begin(), alice.end(), x) != alice.end() &&
         std::find(bob.begin(), bob.end(), y) != bob.end();
}

namespace {

std::vector<Set> all_inputs(std::uint32_t universe, std::uint32_t size) {
  std::vector<Set> out;
  for (auto mask : all_subsets_mask(universe, size)) out.push_back(from_mask(mask));
  return out;
}

void check_enumerable(const Domain& domain) {
  require(domain.universe <= 64, "exhaustive mode needs a universe of at most 64 elements");
  const auto a = domain.alice_count();
  const auto b = domain.bob_count();
  require(a == 0 || b <= kMaxExhaustivePairs / a, "domain too large for exhaustive enumeration");
}

}  // namespace

Rectangle Rectangle::whole(const Domain& domain) {
  check_enumerable(domain);
  return {all_inputs(domain.universe, domain.size_x), all_inputs(domain.universe, domain.size_y)};
}

RectanglePartition extract_rectangles(const ProtocolTree& tree, std::uint64_t public_string) {
  const Domain& domain = tree.domain();
  check_enumerable(domain);
  const auto xs = all_inputs(domain.universe, domain.size_x);
  const auto ys = all_inputs(domain.universe, domain.size_y);

  // Feature values only depend on the sender's own input.
  const auto& nodes = tree.nodes();
  std::vector<std::vector<std::uint64_t>> values(nodes.size());
  for (std::size_t d = 0; d < nodes.size(); ++d) {
    const auto& inputs = nodes[d].owner == Party::kAlice ? xs : ys;
    for (const auto& s : inputs) values[d].push_back(nodes[d].feature.evaluate(s, domain.universe, public_string));
  }

  struct Group {
    std::vector<bool> alice, bob;
    std::uint64_t alice_count = 0, bob_count = 0, pairs = 0;
  };
  std::map<std::string, Group> groups;
  std::string prefix;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      prefix.clear();
      for (std::size_t d = 0; d < nodes.size(); ++d) {
        const auto v = values[d][nodes[d].owner == Party::kAlice ? i : j];
        const std::string bits = tree.message_for_value(static_cast<std::uint32_t>(d), v, prefix);
        if (d) prefix += '.';
        prefix += bits;
      }
      auto& g = groups[prefix];
      if (g.alice.empty()) {
        g.alice.assign(xs.size(), false);
        g.bob.assign(ys.size(), false);
      }
      if (!g.alice[i]) g.alice[i] = true, ++g.alice_count;
      if (!g.bob[j]) g.bob[j] = true, ++g.bob_count;
      ++g.pairs;
    }
  }

  RectanglePartition partition;
  for (auto& [key, g] : groups) {
    // Pairs are distinct, so a full product count means product closure.
    if (g.pairs != g.alice_count * g.bob_count) {
      throw InvariantFailure("transcript " + key + " does not induce a rectangle");
    }
    Rectangle rect;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (g.alice[i]) rect.alice.push_back(xs[i]);
    for (std::size_t j = 0; j < ys.size(); ++j)
      if (g.bob[j]) rect.bob.push_back(ys[j]);
    partition.transcripts.push_back(key);
    partition.rectangles.push_back(std::move(rect));
  }
  return partition;
}

std::vector<TranscriptEstimate> sample_transcripts(const ProtocolTree& tree, std::uint64_t samples,
                                                   std::uint64_t seed, std::uint64_t public_string) {
  require(samples >= 1, "need at least one sample");
  const Domain& domain = tree.domain();
  Rng rng(seed);
  std::map<std::string, std::uint64_t> hits;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Set x = random_subset(domain.universe, domain.size_x, rng);
    const Set y = random_subset(domain.universe, domain.size_y, rng);
    ++hits[run_protocol(tree, x, y, public_string).transcript.key()];
  }
  std::vector<TranscriptEstimate> out;
  for (const auto& [key, count] : hits) {
    const auto ci = stats::wilson_interval(count, samples);
    out.push_back({key, count, static_cast<double>(count) / static_cast<double>(samples), ci.lower, ci.upper});
  }
  return out;
}

Rational RectangleStats::pair(std::uint32_t a, std::uint32_t b) const {
  if (a > b) std::swap(a, b);
  auto it = pair_probability.find({a, b});
  return it == pair_probability.end() ? Rational(0) : it->second;
}

RectangleStats rectangle_stats(const Rectangle& rect, const Domain& domain) {
  require(!rect.empty(), "rectangle is empty");
  require(domain.universe <= 64, "rectangle statistics need a universe of at most 64 elements");
  RectangleStats stats;
  std::vector<std::uint64_t> by_size(std::min(domain.size_x, domain.size_y) + 1, 0);
  std::vector<std::uint64_t> bob_masks;
  for (const auto& y : rect.bob) bob_masks.push_back(to_mask(y));
  for (const auto& x : rect.alice) {
    const auto mx = to_mask(x);
    for (auto my : bob_masks) {
      const auto j = static_cast<std::size_t>(std::popcount(mx & my));
      require(j < by_size.size(), "rectangle input does not match the domain sizes");
      ++by_size[j];
    }
  }
  const BigInt total = BigInt(rect.alice.size()) * rect.bob.size();
  for (auto c : by_size) stats.size_mass.emplace_back(BigInt(c), total);

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> counts;
  for (const auto& x : rect.alice) {
    for (std::size_t p = 0; p < x.size(); ++p)
      for (std::size_t q = p + 1; q < x.size(); ++q) ++counts[{x[p], x[q]}];
  }
  for (const auto& [key, c] : counts) stats.pair_probability[key] = Rational(BigInt(c), BigInt(rect.alice.size()));
  return stats;
}

bool is_delta_labeled(const Rectangle& rect, const Rational& delta, const RectangleStats& stats) {
  require(!rect.empty(), "rectangle is empty");
  std::uint64_t labeled = 0;
  for (const auto& y : rect.bob) {
    bool found = false;
    for (std::size_t p = 0; p < y.size() && !found; ++p) {
      for (std::size_t q = p + 1; q < y.size() && !found; ++q) found = stats.pair(y[p], y[q]) >= delta;
    }
    if (found) ++labeled;
  }
  return labeled * 3 > rect.bob.size();
}

bool is_delta_labeled(const Rectangle& rect, const Rational& delta, const Domain& domain) {
  return is_delta_labeled(rect, delta, rectangle_stats(rect, domain));
}

RazborovDistribution RazborovDistribution::product(std::uint32_t universe, std::uint32_t k1, std::uint32_t k2) {
  require(k1 >= 1 && k1 <= k2 && k2 <= universe, "product distribution needs 1 <= k1 <= k2 <= universe");
  return {Kind::kProduct, {universe, k1, k2}};
}

RazborovDistribution RazborovDistribution::mixed(std::uint32_t l) {
  require(l >= 1, "mixed distribution needs l >= 1");
  return {Kind::kMixed, {4 * l - 1, l, l}};
}

RazborovRatio razborov_ratio(const Rectangle& rect, const RazborovDistribution& dist) {
  const Domain& d = dist.domain;
  require(d.universe <= 64, "Razborov ratio needs a universe of at most 64 elements");
  std::uint64_t disjoint = 0, single = 0;
  std::vector<std::uint64_t> bob_masks;
  for (const auto& y : rect.bob) {
    require(y.size() == d.size_y, "Bob input has the wrong size");
    bob_masks.push_back(to_mask(y));
  }
  for (const auto& x : rect.alice) {
    require(x.size() == d.size_x, "Alice input has the wrong size");
    const auto mx = to_mask(x);
    for (auto my : bob_masks) {
      const int j = std::popcount(mx & my);
      if (j == 0) ++disjoint;
      else if (j == 1) ++single;
    }
  }
  RazborovRatio out;
  const BigInt all_x = binomial(d.universe, d.size_x);
  if (dist.kind == RazborovDistribution::Kind::kProduct) {
    const BigInt all = all_x * binomial(d.universe, d.size_y);
    out.mass_x0 = Rational(BigInt(disjoint), all);
    out.mass_x1 = Rational(BigInt(single), all);
  } else {
    // 3/4 on uniform disjoint pairs, 1/4 on uniform one-element overlaps.
    const BigInt n0 = all_x * binomial(d.universe - d.size_x, d.size_y);
    const BigInt n1 = all_x * d.size_x * binomial(d.universe - d.size_x, d.size_y - 1);
    out.mass_x0 = Rational(3, 4) * Rational(BigInt(disjoint), n0);
    out.mass_x1 = Rational(1, 4) * Rational(BigInt(single), n1);
  }
  if (out.mass_x0 > 0) out.ratio = out.mass_x1 / out.mass_x0;
  return out;
}

Rectangle random_rectangle(const Domain& domain, double alice_density, double bob_density, Rng& rng) {
  require(alice_density > 0.0 && alice_density <= 1.0 && bob_density > 0.0 && bob_density <= 1.0,
          "densities must lie in (0, 1]");
  const auto xs = all_inputs(domain.universe, domain.size_x);
  const auto ys = all_inputs(domain.universe, domain.size_y);
  std::bernoulli_distribution keep_a(alice_density), keep_b(bob_density);
  Rectangle rect;
  while (rect.alice.empty()) {
    for (const auto& x : xs)
      if (keep_a(rng)) rect.alice.push_back(x);
  }
  while (rect.bob.empty()) {
    for (const auto& y : ys)
      if (keep_b(rng)) rect.bob.push_back(y);
  }
  return rect;
}

json to_json(const Rectangle& rect) { return {{"alice", rect.alice}, {"bob", rect.bob}}; }

json to_json(const RectangleStats& stats) {
  json mass = json::array();
  for (const auto& m : stats.size_mass) mass.push_back(qsep::to_string(m));
  json pairs = json::array();
  for (const auto& [key, p] : stats.pair_probability) {
    pairs.push_back({{"a", key.first}, {"b", key.second}, {"p", qsep::to_string(p)}});
  }
  return {{"size_mass", mass}, {"pairs", pairs}};
}

Rectangle rectangle_from_json(const json& j) {
  Rectangle rect;
  for (const auto& x : j.at("alice")) rect.alice.push_back(make_set(x.get<std::vector<std::uint32_t>>()));
  for (const auto& y : j.at("bob")) rect.bob.push_back(make_set(y.get<std::vector<std::uint32_t>>()));
  return rect;
}

}  // namespace qsep::protocols
