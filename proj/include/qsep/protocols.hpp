#pragma once

#include "qsep/gf2.hpp"
#include "qsep/problems.hpp"
#include "qsep/random.hpp"
#include "qsep/rational.hpp"
#include "qsep/sets.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qsep::protocols {

enum class Party { kAlice, kBob };

/// Shape of the input domain: Alice holds a size_x-subset and Bob a
/// size_y-subset of {1..universe}.
struct Domain {
  std::uint32_t universe = 0;
  std::uint32_t size_x = 0;
  std::uint32_t size_y = 0;

  /// PS/Piip inputs at size n: ([n^2], n/2, n).
  static Domain for_instances(std::uint32_t n);
  std::uint64_t alice_count() const;
  std::uint64_t bob_count() const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

enum class Problem { kPs, kPiip, kDisjointness };

/// What Bob outputs at a leaf.
struct ProtocolAnswer {
  enum class Kind { kRefuse, kBits, kSet };
  Kind kind = Kind::kRefuse;
  gf2::BitString bits;
  Set set;

  bool refused() const { return kind == Kind::kRefuse; }
  friend bool operator==(const ProtocolAnswer&, const ProtocolAnswer&) = default;
};

/// A function of one party's own input set, used to index message tables.
struct Feature {
  enum class Kind { kNone, kRank, kMin, kMax, kMinParity, kSumMod, kContains, kElement, kCountAtMost, kPublic };
  Kind kind = Kind::kNone;
  std::uint32_t parameter = 0;

  /// "none", "rank", "min", "max", "min_parity", "sum_mod:k", "contains:e",
  /// "element:i" (i-th smallest), "count_at_most:t", "public".
  static Feature parse(const std::string& text);
  std::string name() const;

  std::uint64_t evaluate(const Set& input, std::uint32_t universe, std::uint64_t public_string) const;
  /// Number of distinct values on inputs of the given size, when small.
  std::optional<std::uint64_t> value_count(std::uint32_t universe, std::uint32_t size) const;
};

/// One round. The sender computes the feature of its own input and looks up
/// table[prefix][value] (with "*" wildcards at either level); without a
/// table the message is the feature value written in `bits` bits.
struct Node {
  Party owner = Party::kAlice;
  std::uint32_t depth = 0;
  Feature feature;
  std::uint32_t bits = 0;
  std::map<std::string, std::map<std::string, std::string>> table;
};

/// Bob's output rule at a leaf.
struct AnswerRule {
  enum class Kind { kRefuse, kConstBits, kConstSet, kFullInformation };
  Kind kind = Kind::kRefuse;
  std::string bits;           // kConstBits
  Set set;                    // kConstSet
  std::uint32_t rank_depth = 0;  // kFullInformation: depth of Alice's rank message
};

struct Message {
  Party sender = Party::kAlice;
  std::string bits;
};

struct Transcript {
  std::vector<Message> messages;

  std::size_t bit_count() const;
  /// Messages joined by '.', "" for the empty transcript.
  std::string key() const;
};

/// Deterministic two-party protocol over (input, public random string),
/// stored declaratively. Rounds run in depth order; Bob answers from the
/// transcript and his own input.
class ProtocolTree {
 public:
  ProtocolTree() = default;
  ProtocolTree(Problem problem, std::uint32_t n, Domain domain, std::uint32_t public_bits, std::vector<Node> nodes,
               std::map<std::string, AnswerRule> answers);

  static ProtocolTree from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  Problem problem() const noexcept { return problem_; }
  std::uint32_t n() const noexcept { return n_; }
  const Domain& domain() const noexcept { return domain_; }
  std::uint32_t public_bits() const noexcept { return public_bits_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::map<std::string, AnswerRule>& answers() const noexcept { return answers_; }

  /// Sum of the declared message widths.
  std::uint64_t declared_cost() const;

  /// Message of node `depth` given the sender's input and the transcript so far.
  /// Throws CostViolation when the message exceeds the declared width.
  std::string message(std::uint32_t depth, const Set& own_input, const std::string& prefix,
                      std::uint64_t public_string) const;
  /// Same, given the already evaluated feature value.
  std::string message_for_value(std::uint32_t depth, std::uint64_t value, const std::string& prefix) const;
  ProtocolAnswer answer(const Transcript& transcript, const Set& bob_input) const;

 private:
  Problem problem_ = Problem::kPs;
  std::uint32_t n_ = 0;
  Domain domain_;
  std::uint32_t public_bits_ = 0;
  std::vector<Node> nodes_;
  std::map<std::string, AnswerRule> answers_;
};

struct RunResult {
  ProtocolAnswer answer;
  Transcript transcript;
  std::uint64_t public_string = 0;
};

/// Runs the tree on (x, y) with an explicit public random string.
RunResult run_protocol(const ProtocolTree& tree, const Set& x, const Set& y, std::uint64_t public_string);
/// Draws the public string from `seed`.
RunResult run_protocol(const ProtocolTree& tree, const Instance& inst, std::uint64_t seed);

// Stock protocols ------------------------------------------------------------

/// Alice sends the rank of x; Bob outputs the correct answer.
ProtocolTree full_information_tree(Problem problem, std::uint32_t n);
/// No messages; Bob always outputs `answer`.
ProtocolTree constant_tree(Problem problem, std::uint32_t n, AnswerRule answer);
/// Alice sends the parity of min(x).
ProtocolTree min_parity_tree(Problem problem, std::uint32_t n);
/// Random tree with 1-bit messages and 1..max_depth rounds, used as a test corpus.
ProtocolTree random_tree(Problem problem, std::uint32_t n, Rng& rng, std::uint32_t max_depth = 3,
                         std::optional<Domain> domain = std::nullopt);

// Rectangles -----------------------------------------------------------------

struct Rectangle {
  std::vector<Set> alice;
  std::vector<Set> bob;

  std::uint64_t size() const { return std::uint64_t{alice.size()} * bob.size(); }
  bool empty() const { return alice.empty() || bob.empty(); }
  bool contains(const Set& x, const Set& y) const;

  static Rectangle whole(const Domain& domain);
  static Rectangle singleton(const Set& x, const Set& y) { return {{x}, {y}}; }
};

/// A deterministic protocol's leaves as rectangles.
struct RectanglePartition {
  std::vector<std::string> transcripts;
  std::vector<Rectangle> rectangles;
};

/// Largest |Alice inputs| * |Bob inputs| accepted by exhaustive enumeration.
constexpr std::uint64_t kMaxExhaustivePairs = 50'000'000;

/// Runs the protocol on every input pair (with public string fixed), groups
/// pairs by transcript and checks that every group is a product set. Throws
/// InvariantFailure on a non-rectangle group.
RectanglePartition extract_rectangles(const ProtocolTree& tree, std::uint64_t public_string = 0);

/// Estimated mass of each transcript under the uniform input distribution,
/// for domains too large to enumerate.
struct TranscriptEstimate {
  std::string transcript;
  std::uint64_t hits = 0;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};
std::vector<TranscriptEstimate> sample_transcripts(const ProtocolTree& tree, std::uint64_t samples,
                                                   std::uint64_t seed, std::uint64_t public_string = 0);

/// Exact statistics of the uniform distribution restricted to a rectangle.
struct RectangleStats {
  /// U_A(X_j) for j = 0..min(size_x, size_y).
  std::vector<Rational> size_mass;
  /// Pr_{X ~ U_A|Alice}[{a, b} ⊆ X] for every pair with nonzero probability.
  std::map<std::pair<std::uint32_t, std::uint32_t>, Rational> pair_probability;

  Rational pair(std::uint32_t a, std::uint32_t b) const;
};

RectangleStats rectangle_stats(const Rectangle& rect, const Domain& domain);

/// Pr_{Y ~ U_A|Bob}[exists a != b in Y with Pr_{X ~ U_A|Alice}[{a,b} ⊆ X] >= delta] > 1/3.
bool is_delta_labeled(const Rectangle& rect, const Rational& delta, const Domain& domain);
bool is_delta_labeled(const Rectangle& rect, const Rational& delta, const RectangleStats& stats);

/// Input distributions for the Razborov-ratio study.
struct RazborovDistribution {
  enum class Kind {
    kProduct,  // Alice uniform size_x-set, Bob uniform size_y-set, independent
    kMixed     // universe = 4l - 1, sizes l; 3/4 uniform disjoint, 1/4 uniform one-element overlap
  };
  Kind kind = Kind::kProduct;
  Domain domain;

  static RazborovDistribution product(std::uint32_t universe, std::uint32_t k1, std::uint32_t k2);
  static RazborovDistribution mixed(std::uint32_t l);
};

struct RazborovRatio {
  Rational mass_x1;  // D(A ∩ X_1)
  Rational mass_x0;  // D(A ∩ X_0)
  std::optional<Rational> ratio;  // mass_x1 / mass_x0 when mass_x0 > 0
};

RazborovRatio razborov_ratio(const Rectangle& rect, const RazborovDistribution& dist);

/// Rectangle with each Alice / Bob input of the domain kept independently
/// with the given probabilities (resampled until nonempty).
Rectangle random_rectangle(const Domain& domain, double alice_density, double bob_density, Rng& rng);

nlohmann::json to_json(const Rectangle& rect);
nlohmann::json to_json(const RectangleStats& stats);
Rectangle rectangle_from_json(const nlohmann::json& j);

std::string to_string(Party party);
std::string to_string(Problem problem);
Problem parse_problem(const std::string& text);

}  // namespace qsep::protocols
