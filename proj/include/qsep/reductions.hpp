#pragma once

#include "qsep/gf2.hpp"
#include "qsep/problems.hpp"
#include "qsep/protocols.hpp"
#include "qsep/random.hpp"
#include "qsep/rational.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qsep::reductions {

/// Labeled record of one reduction run. Stages are only filled in when the
/// caller asks for a trace; the verdict is always set.
struct ReductionTrace {
  bool enabled = false;
  std::vector<std::pair<std::string, nlohmann::json>> stages;
  std::string verdict;

  void record(const std::string& label, nlohmann::json data);
  nlohmann::json to_json() const;
};

// Solvers ---------------------------------------------------------------------

/// A protocol for Pin, possibly randomized through `rng`.
class PinSolver {
 public:
  virtual ~PinSolver() = default;
  virtual std::string name() const = 0;
  virtual std::uint64_t cost(std::uint32_t n) const = 0;
  /// nullopt is a refusal.
  virtual std::optional<PinAnswer> solve(const PinInstance& inst, Rng& rng) const = 0;
  /// Exact answer probability on every valid instance, when known.
  virtual std::optional<Rational> answer_rate(std::uint32_t) const { return std::nullopt; }
};

/// The one-way quantum protocol, sampled.
class QuantumPinSolver : public PinSolver {
 public:
  std::string name() const override { return "quantum"; }
  std::uint64_t cost(std::uint32_t n) const override;
  std::optional<PinAnswer> solve(const PinInstance& inst, Rng& rng) const override;
  std::optional<Rational> answer_rate(std::uint32_t n) const override;
};

/// Always answers correctly: a uniformly random block and a uniformly random
/// nonzero z orthogonal to that block's pair.
class PerfectPinSolver : public PinSolver {
 public:
  std::string name() const override { return "perfect"; }
  std::uint64_t cost(std::uint32_t n) const override;
  std::optional<PinAnswer> solve(const PinInstance& inst, Rng& rng) const override;
  std::optional<Rational> answer_rate(std::uint32_t) const override { return Rational(1); }
};

class RefusingPinSolver : public PinSolver {
 public:
  std::string name() const override { return "refuse"; }
  std::uint64_t cost(std::uint32_t) const override { return 0; }
  std::optional<PinAnswer> solve(const PinInstance&, Rng&) const override { return std::nullopt; }
  std::optional<Rational> answer_rate(std::uint32_t) const override { return Rational(0); }
};

/// A PS protocol that exposes the rectangle its run lands in.
class PsRectangleSolver {
 public:
  virtual ~PsRectangleSolver() = default;
  virtual std::string name() const = 0;
  virtual std::uint64_t cost(std::uint32_t n) const = 0;
  /// Rectangle containing (x, y) for this run; nullptr when the run yields none.
  virtual std::shared_ptr<const protocols::Rectangle> rectangle(const Instance& inst, Rng& rng) const = 0;
};

/// Deterministic protocol tree; its partition is extracted once.
class TreePsSolver : public PsRectangleSolver {
 public:
  explicit TreePsSolver(protocols::ProtocolTree tree);
  std::string name() const override { return "tree"; }
  std::uint64_t cost(std::uint32_t) const override { return tree_.declared_cost(); }
  std::shared_ptr<const protocols::Rectangle> rectangle(const Instance& inst, Rng& rng) const override;

 private:
  protocols::ProtocolTree tree_;
  std::map<std::string, std::shared_ptr<const protocols::Rectangle>> by_transcript_;
};

/// Full information: the singleton rectangle.
class PerfectPsSolver : public PsRectangleSolver {
 public:
  std::string name() const override { return "perfect"; }
  std::uint64_t cost(std::uint32_t n) const override;
  std::shared_ptr<const protocols::Rectangle> rectangle(const Instance& inst, Rng& rng) const override;
};

/// Points at a wrong pair: {x_bad} x {y} where x_bad holds two elements of y outside x.
class AdversarialPsSolver : public PsRectangleSolver {
 public:
  std::string name() const override { return "adversarial"; }
  std::uint64_t cost(std::uint32_t n) const override;
  std::shared_ptr<const protocols::Rectangle> rectangle(const Instance& inst, Rng& rng) const override;
};

/// One-way quantum PS protocol. The rectangle is every Alice input under which
/// Bob's observed z had nonzero probability, times {y}.
class QuantumPsSolver : public PsRectangleSolver {
 public:
  std::string name() const override { return "quantum"; }
  std::uint64_t cost(std::uint32_t n) const override;
  std::shared_ptr<const protocols::Rectangle> rectangle(const Instance& inst, Rng& rng) const override;
};

/// A protocol that tries to output t elements of x ∩ y.
class PiipSolver {
 public:
  virtual ~PiipSolver() = default;
  virtual std::string name() const = 0;
  virtual std::optional<Set> solve(const Set& x, const Set& y, Rng& rng) const = 0;
};

/// Outputs the t smallest elements of x ∩ y (refuses when there are fewer).
class PerfectPiipSolver : public PiipSolver {
 public:
  explicit PerfectPiipSolver(std::uint32_t t) : t_(t) {}
  std::string name() const override { return "perfect"; }
  std::optional<Set> solve(const Set& x, const Set& y, Rng& rng) const override;

 private:
  std::uint32_t t_;
};

/// "quantum", "perfect" or "refuse".
std::unique_ptr<PinSolver> make_pin_solver(const std::string& name);
/// "perfect", "adversarial" or "quantum".
std::unique_ptr<PsRectangleSolver> make_ps_solver(const std::string& name);

// Pin -> PS -------------------------------------------------------------------

struct In2iiOptions {
  bool identity_permutations = false;  // debug: sigma1, sigma2 = identity
  bool trace = false;
};

struct In2iiAnswer {
  std::vector<std::uint32_t> sigma1;
  gf2::BitString z;
};

struct In2iiResult {
  std::optional<In2iiAnswer> answer;
  PinInstance image;              // what the solver saw
  std::uint32_t target_block = 0;  // sigma2(1): position of y among the blocks
  std::optional<PinAnswer> solver_answer;
  ReductionTrace trace;
};

/// The Pin instance built from (x, y) before permuting: x' = {n^2+1..n^2+n/2} ∪ x
/// and blocks (y, y'_1, ..., y'_{n/4-1}) with y'_j = {n^2 + j + k n/4 : 0 <= k < n}.
PinInstance in2ii_padded_instance(const Instance& inst);

/// Runs the Pin solver on a randomly relabeled padded instance and keeps the
/// answer iff it names the block holding y.
In2iiResult reduce_in2ii(const Instance& inst, const PinSolver& solver, Rng& rng, In2iiOptions options = {});
In2iiResult reduce_in2ii(const Instance& inst, const PinSolver& solver, std::uint64_t seed, In2iiOptions options = {});

/// PS membership of an answer (sigma1, z): Sigma = sigma0 after sigma1.
bool in2ii_answer_correct(const Instance& inst, const In2iiAnswer& answer);

struct DerandomizeResult {
  bool found = false;
  std::uint64_t seed = 0;         // r0: fixes sigma1 and sigma2
  std::uint64_t seeds_tried = 0;
  double answer_rate = 0.0;       // measured Pr[answer | R = r0]
  double error_rate = 0.0;        // measured Pr[wrong | answer, R = r0]
  double threshold = 0.0;         // required answer rate
  double solver_rate = 0.0;       // solver answer rate used for the threshold
};

/// Searches seeds r0 (derived from `seed`) for one whose fixed relabeling
/// keeps answer rate >= (2/n) * (solver answer rate) and error <= 2 eps,
/// each measured on `trials` draws from U^(2).
DerandomizeResult derandomize_in2ii(const PinSolver& solver, std::uint32_t n, double epsilon, std::uint64_t budget,
                                    std::uint64_t trials, std::uint64_t seed);

// PS -> Piip ------------------------------------------------------------------

struct Ii2iipOptions {
  double gamma = 1.0;                  // solver success probability
  std::optional<Rational> delta;       // default c_delta / k^2
  Rational c_delta = 1;
  bool trace = false;
};

/// D(j) = U^(>=2)(X_j) for j = 0..n/2 (zero below 2).
std::vector<Rational> ii2iip_j0_distribution(std::uint32_t n);
/// ceil(3 log2(312 / (gamma delta))).
std::uint32_t ii2iip_threshold(double gamma, const Rational& delta);

struct Ii2iipResult {
  std::optional<Set> answer;
  std::uint32_t j0 = 0;
  std::uint32_t threshold = 0;
  std::optional<Instance> image;  // (rho(x~), rho(y)) when step 4 was reached
  ReductionTrace trace;
};

/// Six-step protocol: answers a pair verified to lie in x ∩ y, or refuses.
Ii2iipResult reduce_ii2iip(const Instance& inst, const PsRectangleSolver& solver, Rng& rng, Ii2iipOptions options = {});
Ii2iipResult reduce_ii2iip(const Instance& inst, const PsRectangleSolver& solver, std::uint64_t seed,
                           Ii2iipOptions options = {});

// Padding and repetition --------------------------------------------------------

enum class Verdict { kZero, kRefuse };
std::string to_string(Verdict verdict);

struct PaddingResult {
  Verdict verdict = Verdict::kRefuse;
  Instance padded;  // (rho(x'_0), rho(y'_0))
  ReductionTrace trace;
};

/// (x', y') over [m] with m = n^2 - i0, |x'| = n/2 - i0, |y'| = n - i0.
/// Pads both with {m+1..n^2}, relabels by a random rho and answers "zero"
/// iff the solver returns t elements, all images of padding.
PaddingResult reduce_iip_padding(std::uint32_t n, const Set& x_prime, const Set& y_prime, std::uint32_t i0,
                                 std::uint32_t t, const PiipSolver& solver, Rng& rng, bool trace = false);

/// "zero" iff all l inner runs say "zero".
Verdict repeat_iip(std::uint32_t l, const std::function<Verdict(Rng&)>& inner, Rng& rng);
Verdict repeat_iip(std::uint32_t l, const std::function<Verdict(Rng&)>& inner, std::uint64_t seed);

// Embedding T_r ------------------------------------------------------------------

/// The public randomness r: an injection [m] -> [n] (image M) and beta,
/// disjoint from M.
struct EmbedRandomness {
  std::vector<std::uint32_t> injection;  // injection[i-1] is the image of i
  Set beta;
};

EmbedRandomness draw_embedding(std::uint32_t m, std::uint32_t n, std::uint32_t beta_size, Rng& rng);
Set embed_alice(const Set& x_prime, const EmbedRandomness& r);
Set embed_bob(const Set& y_prime, const EmbedRandomness& r);

struct EmbedResult {
  Set x;
  Set y;
  EmbedRandomness r;
};

/// x', y' are l-subsets of [m] with m = 4l - 1. The result lives in [n]:
/// x = M(x'), y = M(y') ∪ beta with |beta| = k2 - l.
EmbedResult embed_razlem(const Set& x_prime, const Set& y_prime, std::uint32_t n, std::uint32_t k2, Rng& rng);

}  // namespace qsep::reductions
