#include "qsep/errors.hpp"
#include "qsep/protocols.hpp"

#include <algorithm>

namespace qsep::protocols {

using nlohmann::json;

Domain Domain::for_instances(std::uint32_t n) {
  validate_size(n);
  return {n * n, n / 2, n};
}

std::uint64_t Domain::alice_count() const { return binomial_u64(universe, size_x); }
std::uint64_t Domain::bob_count() const { return binomial_u64(universe, size_y); }

std::string to_string(Party party) { return party == Party::kAlice ? "alice" : "bob"; }

std::string to_string(Problem problem) {
  switch (problem) {
    case Problem::kPs:
      return "ps";
    case Problem::kPiip:
      return "piip";
    case Problem::kDisjointness:
      return "disj";
  }
  return "ps";
}

Problem parse_problem(const std::string& text) {
  if (text == "ps") return Problem::kPs;
  if (text == "piip") return Problem::kPiip;
  if (text == "disj") return Problem::kDisjointness;
  throw ContractViolation("unknown problem: " + text);
}

namespace {

Party parse_party(const std::string& text) {
  if (text == "alice") return Party::kAlice;
  if (text == "bob") return Party::kBob;
  throw ContractViolation("unknown party: " + text);
}

std::string to_binary(std::uint64_t value, std::uint32_t width) {
  std::string out(width, '0');
  for (std::uint32_t i = 0; i < width; ++i) {
    if ((value >> (width - 1 - i)) & 1U) out[i] = '1';
  }
  return out;
}

std::uint64_t from_binary(const std::string& bits) {
  std::uint64_t value = 0;
  for (char c : bits) value = (value << 1) | static_cast<std::uint64_t>(c == '1');
  return value;
}

std::uint32_t parameter_of(const std::string& text, std::size_t colon) {
  require(colon != std::string::npos && colon + 1 < text.size(), "feature needs a parameter: " + text);
  return static_cast<std::uint32_t>(std::stoul(text.substr(colon + 1)));
}

}  // namespace

Feature Feature::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (head == "none") return {Kind::kNone, 0};
  if (head == "rank") return {Kind::kRank, 0};
  if (head == "min") return {Kind::kMin, 0};
  if (head == "max") return {Kind::kMax, 0};
  if (head == "min_parity") return {Kind::kMinParity, 0};
  if (head == "public") return {Kind::kPublic, 0};
  if (head == "sum_mod") {
    auto k = parameter_of(text, colon);
    require(k >= 1, "sum_mod needs a positive modulus");
    return {Kind::kSumMod, k};
  }
  if (head == "contains") return {Kind::kContains, parameter_of(text, colon)};
  if (head == "element") {
    auto i = parameter_of(text, colon);
    require(i >= 1, "element index is 1-based");
    return {Kind::kElement, i};
  }
  if (head == "count_at_most") return {Kind::kCountAtMost, parameter_of(text, colon)};
  throw ContractViolation("unknown feature: " + text);
}

std::string Feature::name() const {
  switch (kind) {
    case Kind::kNone:
      return "none";
    case Kind::kRank:
      return "rank";
    case Kind::kMin:
      return "min";
    case Kind::kMax:
      return "max";
    case Kind::kMinParity:
      return "min_parity";
    case Kind::kSumMod:
      return "sum_mod:" + std::to_string(parameter);
    case Kind::kContains:
      return "contains:" + std::to_string(parameter);
    case Kind::kElement:
      return "element:" + std::to_string(parameter);
    case Kind::kCountAtMost:
      return "count_at_most:" + std::to_string(parameter);
    case Kind::kPublic:
      return "public";
  }
  return "none";
}

std::uint64_t Feature::evaluate(const Set& input, std::uint32_t universe, std::uint64_t public_string) const {
  switch (kind) {
    case Kind::kNone:
      return 0;
    case Kind::kRank:
      return subset_rank(input, universe);
    case Kind::kMin:
      return input.empty() ? 0 : input.front();
    case Kind::kMax:
      return input.empty() ? 0 : input.back();
    case Kind::kMinParity:
      return input.empty() ? 0 : input.front() % 2;
    case Kind::kSumMod: {
      std::uint64_t sum = 0;
      for (auto e : input) sum += e;
      return sum % parameter;
    }
    case Kind::kContains:
      return qsep::contains(input, parameter) ? 1 : 0;
    case Kind::kElement:
      return parameter <= input.size() ? input[parameter - 1] : 0;
    case Kind::kCountAtMost:
      return static_cast<std::uint64_t>(std::upper_bound(input.begin(), input.end(), parameter) - input.begin());
    case Kind::kPublic:
      return public_string;
  }
  return 0;
}

std::optional<std::uint64_t> Feature::value_count(std::uint32_t universe, std::uint32_t size) const {
  switch (kind) {
    case Kind::kNone:
      return 1;
    case Kind::kRank:
      return binomial_u64(universe, size);
    case Kind::kMin:
    case Kind::kMax:
    case Kind::kElement:
      return universe + 1;
    case Kind::kMinParity:
    case Kind::kContains:
      return 2;
    case Kind::kSumMod:
      return parameter;
    case Kind::kCountAtMost:
      return size + 1;
    case Kind::kPublic:
      return std::nullopt;
  }
  return std::nullopt;
}

std::size_t Transcript::bit_count() const {
  std::size_t total = 0;
  for (const auto& m : messages) total += m.bits.size();
  return total;
}

std::string Transcript::key() const {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i) out += '.';
    out += messages[i].bits;
  }
  return out;
}

ProtocolTree::ProtocolTree(Problem problem, std::uint32_t n, Domain domain, std::uint32_t public_bits,
                           std::vector<Node> nodes, std::map<std::string, AnswerRule> answers)
    : problem_(problem),
      n_(n),
      domain_(domain),
      public_bits_(public_bits),
      nodes_(std::move(nodes)),
      answers_(std::move(answers)) {
  require(domain_.size_x <= domain_.universe && domain_.size_y <= domain_.universe, "domain sizes exceed universe");
  require(public_bits_ <= 63, "at most 63 public random bits");
  std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.depth < b.depth; });
  for (std::size_t d = 0; d < nodes_.size(); ++d) {
    require(nodes_[d].depth == d, "protocol nodes must cover depths 0, 1, 2, ... once each");
    require(nodes_[d].bits >= 1 && nodes_[d].bits <= 63, "message width must lie in [1, 63]");
  }
  for (const auto& [key, rule] : answers_) {
    if (rule.kind == AnswerRule::Kind::kFullInformation) {
      require(rule.rank_depth < nodes_.size() && nodes_[rule.rank_depth].owner == Party::kAlice &&
                  nodes_[rule.rank_depth].feature.kind == Feature::Kind::kRank && nodes_[rule.rank_depth].table.empty(),
              "full-information answers need an Alice rank message at the given depth");
    }
  }
}

std::uint64_t ProtocolTree::declared_cost() const {
  std::uint64_t total = 0;
  for (const auto& node : nodes_) total += node.bits;
  return total;
}

std::string ProtocolTree::message(std::uint32_t depth, const Set& own_input, const std::string& prefix,
                                  std::uint64_t public_string) const {
  require(depth < nodes_.size(), "no node at this depth");
  return message_for_value(depth, nodes_[depth].feature.evaluate(own_input, domain_.universe, public_string), prefix);
}

std::string ProtocolTree::message_for_value(std::uint32_t depth, std::uint64_t value, const std::string& prefix) const {
  require(depth < nodes_.size(), "no node at this depth");
  const Node& node = nodes_[depth];
  if (node.table.empty()) {
    if (node.bits < 64 && value >= (std::uint64_t{1} << node.bits)) {
      throw CostViolation("feature value " + std::to_string(value) + " needs more than " +
                          std::to_string(node.bits) + " bits at depth " + std::to_string(depth));
    }
    return to_binary(value, node.bits);
  }
  auto row = node.table.find(prefix);
  if (row == node.table.end()) row = node.table.find("*");
  require(row != node.table.end(), "no message table row for transcript '" + prefix + "'");
  auto cell = row->second.find(std::to_string(value));
  if (cell == row->second.end()) cell = row->second.find("*");
  require(cell != row->second.end(), "no message for feature value " + std::to_string(value));
  const std::string& bits = cell->second;
  if (bits.size() > node.bits) {
    throw CostViolation("message '" + bits + "' exceeds the declared " + std::to_string(node.bits) + " bits");
  }
  return bits;
}

namespace {

gf2::BitString canonical_ps_answer(const Set& common, int width) {
  if (common.size() != 2) return gf2::BitString(width, 1);
  const auto d = gf2::sigma0_encode(common[0], width) ^ gf2::sigma0_encode(common[1], width);
  for (std::uint64_t z = 1;; ++z) {
    gf2::BitString candidate(width, z);
    if (gf2::inner_product(candidate, d) == 0) return candidate;
  }
}

int answer_width(const Domain& domain) {
  int width = 0;
  while ((std::uint64_t{1} << width) < domain.universe) ++width;
  return width;
}

}  // namespace

ProtocolAnswer ProtocolTree::answer(const Transcript& transcript, const Set& bob_input) const {
  auto it = answers_.find(transcript.key());
  if (it == answers_.end()) it = answers_.find("*");
  if (it == answers_.end()) return {};
  const AnswerRule& rule = it->second;
  switch (rule.kind) {
    case AnswerRule::Kind::kRefuse:
      return {};
    case AnswerRule::Kind::kConstBits:
      return {ProtocolAnswer::Kind::kBits, gf2::BitString::parse(rule.bits), {}};
    case AnswerRule::Kind::kConstSet:
      return {ProtocolAnswer::Kind::kSet, {}, rule.set};
    case AnswerRule::Kind::kFullInformation: {
      require(rule.rank_depth < transcript.messages.size(), "transcript too short for full-information answer");
      const Set x = subset_unrank(from_binary(transcript.messages[rule.rank_depth].bits), domain_.universe,
                                  domain_.size_x);
      const Set common = set_intersection(x, bob_input);
      switch (problem_) {
        case Problem::kPiip:
          return {ProtocolAnswer::Kind::kSet, {}, common};
        case Problem::kPs:
          return {ProtocolAnswer::Kind::kBits, canonical_ps_answer(common, answer_width(domain_)), {}};
        case Problem::kDisjointness:
          return {ProtocolAnswer::Kind::kBits, gf2::BitString(1, common.empty() ? 1 : 0), {}};
      }
    }
  }
  return {};
}

namespace {

json rule_to_json(const AnswerRule& rule) {
  switch (rule.kind) {
    case AnswerRule::Kind::kRefuse:
      return {{"kind", "refuse"}};
    case AnswerRule::Kind::kConstBits:
      return {{"kind", "const_bits"}, {"value", rule.bits}};
    case AnswerRule::Kind::kConstSet:
      return {{"kind", "const_set"}, {"value", rule.set}};
    case AnswerRule::Kind::kFullInformation:
      return {{"kind", "full_information"}, {"depth", rule.rank_depth}};
  }
  return {};
}

AnswerRule rule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  AnswerRule rule;
  if (kind == "refuse") {
    rule.kind = AnswerRule::Kind::kRefuse;
  } else if (kind == "const_bits") {
    rule.kind = AnswerRule::Kind::kConstBits;
    rule.bits = j.at("value").get<std::string>();
    gf2::BitString::parse(rule.bits);
  } else if (kind == "const_set") {
    rule.kind = AnswerRule::Kind::kConstSet;
    rule.set = make_set(j.at("value").get<std::vector<std::uint32_t>>());
  } else if (kind == "full_information") {
    rule.kind = AnswerRule::Kind::kFullInformation;
    rule.rank_depth = j.value("depth", 0U);
  } else {
    throw ContractViolation("unknown answer kind: " + kind);
  }
  return rule;
}

}  // namespace

ProtocolTree ProtocolTree::from_json(const json& j) {
  const Problem problem = parse_problem(j.at("problem").get<std::string>());
  const auto n = j.at("n").get<std::uint32_t>();
  Domain domain;
  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    domain = {d.at("universe").get<std::uint32_t>(), d.at("size_x").get<std::uint32_t>(),
              d.at("size_y").get<std::uint32_t>()};
  } else {
    domain = Domain::for_instances(n);
  }
  std::vector<Node> nodes;
  const json node_list = j.value("nodes", json::array());
  for (const auto& jn : node_list) {
    Node node;
    node.owner = parse_party(jn.at("owner").get<std::string>());
    node.depth = jn.at("depth").get<std::uint32_t>();
    node.feature = Feature::parse(jn.value("feature", std::string("none")));
    node.bits = jn.at("bits").get<std::uint32_t>();
    if (jn.contains("table")) {
      for (const auto& [prefix, row] : jn.at("table").items()) {
        for (const auto& [value, bits] : row.items()) node.table[prefix][value] = bits.get<std::string>();
      }
    }
    nodes.push_back(std::move(node));
  }
  std::map<std::string, AnswerRule> answers;
  const json rules = j.value("answers", json::object());
  for (const auto& [key, rule] : rules.items()) answers[key] = rule_from_json(rule);
  return ProtocolTree(problem, n, domain, j.value("public_bits", 0U), std::move(nodes), std::move(answers));
}

json ProtocolTree::to_json() const {
  json nodes = json::array();
  for (const auto& node : nodes_) {
    json jn = {{"owner", to_string(node.owner)},
               {"depth", node.depth},
               {"feature", node.feature.name()},
               {"bits", node.bits}};
    if (!node.table.empty()) jn["table"] = node.table;
    nodes.push_back(std::move(jn));
  }
  json answers = json::object();
  for (const auto& [key, rule] : answers_) answers[key] = rule_to_json(rule);
  return {{"problem", to_string(problem_)},
          {"n", n_},
          {"domain", {{"universe", domain_.universe}, {"size_x", domain_.size_x}, {"size_y", domain_.size_y}}},
          {"public_bits", public_bits_},
          {"nodes", std::move(nodes)},
          {"answers", std::move(answers)}};
}

RunResult run_protocol(const ProtocolTree& tree, const Set& x, const Set& y, std::uint64_t public_string) {
  RunResult result;
  result.public_string = public_string;
  std::string prefix;
  for (const auto& node : tree.nodes()) {
    const Set& own = node.owner == Party::kAlice ? x : y;
    std::string bits = tree.message(node.depth, own, prefix, public_string);
    if (!result.transcript.messages.empty()) prefix += '.';
    prefix += bits;
    result.transcript.messages.push_back({node.owner, std::move(bits)});
  }
  if (result.transcript.bit_count() > tree.declared_cost()) {
    throw CostViolation("transcript exceeds the declared cost");
  }
  result.answer = tree.answer(result.transcript, y);
  return result;
}

RunResult run_protocol(const ProtocolTree& tree, const Instance& inst, std::uint64_t seed) {
  std::uint64_t public_string = 0;
  if (tree.public_bits() > 0) {
    Rng rng(seed);
    public_string = rng() & ((std::uint64_t{1} << tree.public_bits()) - 1);
  }
  return run_protocol(tree, inst.x, inst.y, public_string);
}

ProtocolTree full_information_tree(Problem problem, std::uint32_t n) {
  const Domain domain = Domain::for_instances(n);
  std::uint32_t bits = 0;
  while ((std::uint64_t{1} << bits) < domain.alice_count()) ++bits;
  Node node{Party::kAlice, 0, Feature{Feature::Kind::kRank, 0}, std::max(bits, 1U), {}};
  AnswerRule rule{AnswerRule::Kind::kFullInformation, {}, {}, 0};
  return ProtocolTree(problem, n, domain, 0, {node}, {{"*", rule}});
}

ProtocolTree constant_tree(Problem problem, std::uint32_t n, AnswerRule answer) {
  return ProtocolTree(problem, n, Domain::for_instances(n), 0, {}, {{"*", std::move(answer)}});
}

ProtocolTree min_parity_tree(Problem problem, std::uint32_t n) {
  Node node{Party::kAlice, 0, Feature{Feature::Kind::kMinParity, 0}, 1, {}};
  return ProtocolTree(problem, n, Domain::for_instances(n), 0, {node}, {{"*", AnswerRule{}}});
}

ProtocolTree random_tree(Problem problem, std::uint32_t n, Rng& rng, std::uint32_t max_depth,
                         std::optional<Domain> domain_override) {
  const Domain domain = domain_override.value_or(Domain::for_instances(n));
  const std::uint32_t depth = 1 + static_cast<std::uint32_t>(uniform_index(rng, std::max(max_depth, 1U)));
  std::vector<Node> nodes;
  std::vector<std::string> prefixes{""};
  for (std::uint32_t d = 0; d < depth; ++d) {
    Node node;
    node.owner = uniform_index(rng, 2) ? Party::kBob : Party::kAlice;
    node.depth = d;
    node.bits = 1;
    const std::uint32_t size = node.owner == Party::kAlice ? domain.size_x : domain.size_y;
    const auto element = [&] { return static_cast<std::uint32_t>(uniform_index(rng, domain.universe) + 1); };
    switch (uniform_index(rng, 8)) {
      case 0:
        node.feature = {Feature::Kind::kMin, 0};
        break;
      case 1:
        node.feature = {Feature::Kind::kMax, 0};
        break;
      case 2:
        node.feature = {Feature::Kind::kMinParity, 0};
        break;
      case 3:
        node.feature = {Feature::Kind::kSumMod, static_cast<std::uint32_t>(2 + uniform_index(rng, 3))};
        break;
      case 4:
        node.feature = {Feature::Kind::kContains, element()};
        break;
      case 5:
        node.feature = {Feature::Kind::kElement, static_cast<std::uint32_t>(1 + uniform_index(rng, size))};
        break;
      case 6:
        node.feature = {Feature::Kind::kCountAtMost, element()};
        break;
      default:
        node.feature = {Feature::Kind::kNone, 0};
        break;
    }
    const std::uint64_t values = *node.feature.value_count(domain.universe, size);
    for (const auto& prefix : prefixes) {
      auto& row = node.table[prefix];
      for (std::uint64_t v = 0; v < values; ++v) row[std::to_string(v)] = uniform_index(rng, 2) ? "1" : "0";
    }
    std::vector<std::string> next;
    for (const auto& prefix : prefixes) {
      for (const char* bit : {"0", "1"}) next.push_back(prefix.empty() ? bit : prefix + "." + bit);
    }
    prefixes = std::move(next);
    nodes.push_back(std::move(node));
  }
  std::map<std::string, AnswerRule> answers;
  int width = 0;
  while ((std::uint64_t{1} << width) < domain.universe) ++width;
  for (const auto& leaf : prefixes) {
    AnswerRule rule;
    if (uniform_index(rng, 4) != 0) {
      switch (problem) {
        case Problem::kPs:
          rule.kind = AnswerRule::Kind::kConstBits;
          rule.bits = gf2::BitString(width, 1 + uniform_index(rng, (std::size_t{1} << width) - 1)).to_string();
          break;
        case Problem::kPiip:
          rule.kind = AnswerRule::Kind::kConstSet;
          rule.set = random_subset(domain.universe, std::min<std::uint32_t>(2, domain.universe), rng);
          break;
        case Problem::kDisjointness:
          rule.kind = AnswerRule::Kind::kConstBits;
          rule.bits = uniform_index(rng, 2) ? "1" : "0";
          break;
      }
    }
    answers[leaf] = rule;
  }
  return ProtocolTree(problem, n, domain, 0, std::move(nodes), std::move(answers));
}

}  // namespace qsep::protocols
