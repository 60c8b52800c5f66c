#pragma once

#include "qsep/gf2.hpp"
#include "qsep/problems.hpp"
#include "qsep/random.hpp"
#include "qsep/rational.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace qsep::quantum {

/// Bob's result: block 0 means the first measurement fell outside every block.
struct QuantumOutcome {
  std::uint32_t block = 0;
  std::optional<gf2::BitString> readout;

  bool answered() const { return block >= 1 && readout && !readout->is_zero(); }
  /// The Pin answer; only meaningful when answered().
  PinAnswer answer() const { return {block, *readout}; }
};

/// Exact joint law of (block, readout) for one run of the one-way protocol.
class OutcomeDistribution {
 public:
  OutcomeDistribution(std::uint32_t n, std::vector<Rational> block_probabilities,
                      std::vector<std::vector<Rational>> readout_probabilities);

  std::uint32_t n() const noexcept { return n_; }
  /// Index 0 is the reject outcome; i >= 1 is block i.
  const std::vector<Rational>& block_probabilities() const noexcept { return blocks_; }
  /// Pr[block = i and readout = j], j indexed by the packed value of the readout.
  const std::vector<Rational>& readout_probabilities(std::uint32_t block) const;

  Rational total() const;
  Rational answer_probability() const;

  /// Every outcome with nonzero probability (block 0 has no readout).
  std::vector<std::pair<QuantumOutcome, Rational>> support() const;

  /// True iff, for every block, the readout conditioned on that block is
  /// uniform over {z : <z, sigma0(a) + sigma0(b)> = 0} and zero elsewhere.
  bool conditional_readout_uniform(const PinInstance& inst) const;

 private:
  std::uint32_t n_;
  std::vector<Rational> blocks_;
  std::vector<std::vector<Rational>> readouts_;
};

/// Largest n accepted by the exact pipeline.
constexpr std::uint32_t kMaxExactN = 1024;

/// Simulates the protocol with exact dyadic amplitudes: Alice's uniform
/// superposition over x, Bob's (n/4 + 1)-outcome projective measurement, the
/// Hadamard transform on the projected state and a computational-basis
/// readout. Probabilities come out exact.
OutcomeDistribution run_exact(const PinInstance& inst);

/// (1/2)(1 - 1/n^2): the closed-form answer probability.
Rational closed_form_answer_probability(std::uint32_t n);

/// Floating-point simulation of the same pipeline for drawing outcomes.
/// Post-measurement readout distributions are computed on first use per block
/// and reused, so repeated draws on one instance stay cheap.
class QuantumSampler {
 public:
  explicit QuantumSampler(const PinInstance& inst);

  QuantumOutcome draw(Rng& rng);
  const std::vector<double>& block_probabilities() const noexcept { return block_probs_; }

 private:
  const std::vector<double>& readout_cdf(std::uint32_t block);

  PinInstance inst_;
  std::vector<double> alpha_;
  std::vector<double> block_probs_;
  std::vector<std::vector<double>> readout_cdfs_;
};

QuantumOutcome run_sampled(const PinInstance& inst, std::uint64_t seed);
QuantumOutcome run_sampled(const PinInstance& inst, Rng& rng);

struct RepeatedOutcome {
  QuantumOutcome outcome;
  std::uint32_t repetitions = 0;
  std::uint64_t qubits = 0;
  /// 1-based run that produced the answer; 0 when every run refused.
  std::uint32_t answering_run = 0;
};

/// t = max(1, ceil(log_{3/2}(1/epsilon))) parallel runs.
std::uint32_t repetitions_for(double epsilon);

/// Runs t independent copies and keeps the first answer.
RepeatedOutcome run_repeated(const PinInstance& inst, double epsilon, std::uint64_t seed);
RepeatedOutcome run_repeated(const PinInstance& inst, double epsilon, Rng& rng);

/// ceil(log2(2n^2)) = 2 log n + 1 qubits per run.
std::uint32_t qubit_cost(std::uint32_t n);
std::uint64_t qubit_cost(std::uint32_t n, std::uint32_t repetitions);

// PS-shaped variant ----------------------------------------------------------
//
// The analogous one-way protocol on a PS instance: Alice sends the uniform
// superposition over x inside [n^2], Bob projects onto y, applies the
// Hadamard transform over GF(2)^{2 log n} and reads z. Used as a PS solver by
// the reductions.

/// Readout z when the projection onto y succeeded; nullopt on refusal
/// (projection failed or z = 0).
std::optional<gf2::BitString> run_ps_sampled(const Instance& inst, Rng& rng);

/// Whether the answer z has nonzero probability on input (x, y).
bool ps_outcome_possible(const Set& x, const Set& y, const gf2::BitString& z);

}  // namespace qsep::quantum
