#pragma once

#include "qsep/random.hpp"
#include "qsep/rational.hpp"
#include "qsep/reductions.hpp"
#include "qsep/stats.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qsep::analysis {

/// Proportion estimate with a Wilson interval.
struct Estimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double point = 0.0;
  stats::Interval interval;
  std::uint64_t seed = 0;

  static Estimate from_counts(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed,
                              double confidence = 0.95);
};

/// Trials are split into fixed chunks, chunk c drawing from derive_seed(master, c),
/// so counts do not depend on how chunks are scheduled.
constexpr std::uint64_t kChunkSize = 1024;
void for_each_trial(std::uint64_t trials, std::uint64_t master, const std::function<void(Rng&)>& trial);
Estimate monte_carlo(std::uint64_t trials, std::uint64_t master, const std::function<bool(Rng&)>& trial,
                     double confidence = 0.95);

enum class Verdict { kPass, kFail, kInformational };
std::string to_string(Verdict verdict);
Verdict parse_verdict(const std::string& text);

struct ClaimReport {
  std::string id;
  std::string expected;
  std::string measured;
  std::optional<stats::Interval> interval;
  Verdict verdict = Verdict::kInformational;
  std::string provenance;
};

struct Report {
  std::vector<ClaimReport> claims;
  std::uint64_t seed = 0;
  std::string version;
  std::optional<double> seconds;  // wall time, only when requested

  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
  /// id,expected,measured,lower,upper,verdict,provenance after a "# seed=..." line.
  std::string to_csv() const;
  static Report from_csv(const std::string& text);

  /// True when no claim failed (informational claims never fail).
  bool all_pass() const;
  void append(const std::vector<ClaimReport>& more);
};

std::string library_version();

// Exact validators ----------------------------------------------------------------

/// U(X0) >= 1/3, U(X1) >= 1/6, U(X2) >= 1/13 at this n (informational when
/// violated: the claim is asymptotic) and the tail bound for t = 1..n/2.
std::vector<ClaimReport> validate_claim_cx(std::uint32_t n);

/// For each inequality, the smallest tested n from which it holds for every
/// larger tested n. Pass when that n is at most 16.
struct CxThreshold {
  std::string id;
  std::optional<std::uint32_t> threshold;
};
std::vector<CxThreshold> claim_cx_thresholds(const std::vector<std::uint32_t>& sizes);
std::vector<ClaimReport> validate_claim_cx_sweep(const std::vector<std::uint32_t>& sizes);

/// Exact run of the quantum protocol on `instances` seeded Pin instances:
/// block law, answer probability, zero error over the support.
std::vector<ClaimReport> validate_quantum(std::uint32_t n, std::uint64_t seed, std::uint32_t instances = 1);

// Monte Carlo measurements --------------------------------------------------------

/// Sampled quantum runs on one Pin instance against the exact law.
std::vector<ClaimReport> measure_quantum_sampled(std::uint32_t n, std::uint64_t trials, std::uint64_t seed);

/// Parallel repetition: refusal rate against epsilon and the qubit count.
std::vector<ClaimReport> measure_repetition(std::uint32_t n, double epsilon, std::uint64_t trials, std::uint64_t seed);

/// Pin -> PS answer rate under U^(2) against (4/n) * (solver answer rate).
/// Also checks the relabeled instances by a chi-square on where element 1 lands.
std::vector<ClaimReport> measure_in2ii(std::uint32_t n, const reductions::PinSolver& solver, std::uint64_t trials,
                                       std::uint64_t seed);

/// Padding reduction with the perfect solver on X0- and X1-shaped inputs.
std::vector<ClaimReport> measure_iip_padding(std::uint32_t n, std::uint32_t t, std::uint32_t i0, std::uint64_t trials,
                                             std::uint64_t seed);

/// PS -> Piip reduction: answer rate and zero error.
std::vector<ClaimReport> measure_ii2iip(std::uint32_t n, const reductions::PsRectangleSolver& solver,
                                        std::uint64_t trials, std::uint64_t seed);

/// Embedding T_r: intersection sizes preserved, Alice's image depends on x'
/// and r only, Bob's on y' and r only, and the image of a uniform X_j input
/// is uniform over the X_j pairs of [n] (chi-square, for j = 0 and 1).
std::vector<ClaimReport> measure_embedding(std::uint32_t l, std::uint32_t n, std::uint32_t k2, std::uint64_t trials,
                                           std::uint64_t seed);

/// Frequency of (1/m) sum X_i >= (1 + c) mu for X_i = alpha Bernoulli(mu / alpha).
struct ChernoffPoint {
  std::uint32_t m = 0;
  Estimate rate;
};
ChernoffPoint chernoff_rate(std::uint32_t m, double alpha, double mu, double c, std::uint64_t trials,
                            std::uint64_t seed);
/// Least-squares slope of log2(rate) against m over the points with nonzero rate.
std::optional<double> chernoff_slope(const std::vector<ChernoffPoint>& points);
ClaimReport chernoff_empirical(std::uint32_t m, double alpha, double mu, std::uint64_t trials, std::uint64_t seed,
                               double c = 0.5);
std::vector<ClaimReport> chernoff_sweep(const std::vector<std::uint32_t>& ms, double alpha, double mu,
                                        std::uint64_t trials, std::uint64_t seed, double c = 0.5);

// Experiments ------------------------------------------------------------------

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::uint64_t trials = 100'000;
};

/// "empty", "all-exact" or "separation-demo".
Report run_experiment(const std::string& id, const ExperimentConfig& config);
std::vector<std::string> experiment_ids();

}  // namespace qsep::analysis
