#include "qsep/quantum.hpp"

#include "qsep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qsep::quantum {

OutcomeDistribution::OutcomeDistribution(std::uint32_t n, std::vector<Rational> block_probabilities,
                                         std::vector<std::vector<Rational>> readout_probabilities)
    : n_(n), blocks_(std::move(block_probabilities)), readouts_(std::move(readout_probabilities)) {
  require(readouts_.size() + 1 == blocks_.size(), "one readout table per block");
}

const std::vector<Rational>& OutcomeDistribution::readout_probabilities(std::uint32_t block) const {
  require(block >= 1 && block <= readouts_.size(), "block index out of range");
  return readouts_[block - 1];
}

Rational OutcomeDistribution::total() const {
  Rational sum = blocks_[0];
  for (const auto& table : readouts_) {
    for (const auto& p : table) sum += p;
  }
  return sum;
}

Rational OutcomeDistribution::answer_probability() const {
  Rational sum = 0;
  for (const auto& table : readouts_) {
    for (std::size_t j = 1; j < table.size(); ++j) sum += table[j];
  }
  return sum;
}

std::vector<std::pair<QuantumOutcome, Rational>> OutcomeDistribution::support() const {
  std::vector<std::pair<QuantumOutcome, Rational>> out;
  if (blocks_[0] > 0) out.emplace_back(QuantumOutcome{0, std::nullopt}, blocks_[0]);
  const int bits = pin_answer_bits(n_);
  for (std::uint32_t i = 1; i <= readouts_.size(); ++i) {
    const auto& table = readouts_[i - 1];
    for (std::size_t j = 0; j < table.size(); ++j) {
      if (table[j] > 0) out.emplace_back(QuantumOutcome{i, gf2::BitString(bits, j)}, table[j]);
    }
  }
  return out;
}

bool OutcomeDistribution::conditional_readout_uniform(const PinInstance& inst) const {
  const int bits = pin_answer_bits(n_);
  for (std::uint32_t i = 1; i <= readouts_.size(); ++i) {
    const Set common = set_intersection(inst.x, inst.blocks[i - 1]);
    const auto d = gf2::sigma0_encode(common[0], bits) ^ gf2::sigma0_encode(common[1], bits);
    const auto& table = readouts_[i - 1];
    std::size_t orthogonal = 0;
    for (std::size_t j = 0; j < table.size(); ++j) {
      if (gf2::inner_product(gf2::BitString(bits, j), d) == 0) ++orthogonal;
    }
    const Rational expected = blocks_[i] / Rational(orthogonal);
    for (std::size_t j = 0; j < table.size(); ++j) {
      const bool in_support = gf2::inner_product(gf2::BitString(bits, j), d) == 0;
      if (table[j] != (in_support ? expected : Rational(0))) return false;
    }
  }
  return true;
}

OutcomeDistribution run_exact(const PinInstance& inst) {
  inst.validate();
  require(inst.n <= kMaxExactN, "exact simulation is limited to n <= 1024");
  const std::uint32_t n = inst.n;
  const std::size_t dim = inst.universe();
  const auto log_n = static_cast<unsigned>(log2_n(n));

  // |alpha> = n^{-1/2} sum_{j in x} |j>, basis state |j> at index j - 1.
  std::vector<std::int64_t> alpha(dim, 0);
  for (auto e : inst.x) alpha[e - 1] = 1;

  std::vector<bool> in_some_block(dim, false);
  std::vector<Rational> block_probs(inst.block_count() + 1);
  std::vector<std::vector<Rational>> readouts;
  readouts.reserve(inst.block_count());

  for (std::uint32_t i = 1; i <= inst.block_count(); ++i) {
    // E_i |alpha>, left unnormalized: |H E_i alpha>_j^2 is Pr[i0 = i, a = j].
    std::vector<std::int64_t> projected(dim, 0);
    for (auto e : inst.blocks[i - 1]) {
      projected[e - 1] = alpha[e - 1];
      in_some_block[e - 1] = true;
    }
    gf2::DyadicVector state(std::move(projected), log_n);
    block_probs[i] = state.squared_norm();
    gf2::walsh_hadamard(state);
    std::vector<Rational> table(dim);
    for (std::size_t j = 0; j < dim; ++j) table[j] = state.probability(j);
    readouts.push_back(std::move(table));
  }

  std::vector<std::int64_t> rest(dim, 0);
  for (std::size_t j = 0; j < dim; ++j) {
    if (!in_some_block[j]) rest[j] = alpha[j];
  }
  block_probs[0] = gf2::DyadicVector(std::move(rest), log_n).squared_norm();
  return OutcomeDistribution(n, std::move(block_probs), std::move(readouts));
}

Rational closed_form_answer_probability(std::uint32_t n) {
  return Rational(1, 2) * (Rational(1) - Rational(1, BigInt(n) * n));
}

namespace {

std::size_t draw_from_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, cdf.back())(rng);
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  // Skip zero-width cells that upper_bound could land on at the boundary.
  auto index = static_cast<std::size_t>(it - cdf.begin());
  while (index > 0 && cdf[index] == cdf[index - 1]) --index;
  return index;
}

std::vector<double> to_cdf(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  return cdf;
}

}  // namespace

QuantumSampler::QuantumSampler(const PinInstance& inst) : inst_(inst) {
  inst_.validate();
  const std::size_t dim = inst_.universe();
  alpha_.assign(dim, 0.0);
  const double amp = 1.0 / std::sqrt(static_cast<double>(inst_.n));
  for (auto e : inst_.x) alpha_[e - 1] = amp;

  block_probs_.assign(inst_.block_count() + 1, 0.0);
  double inside = 0.0;
  for (std::uint32_t i = 1; i <= inst_.block_count(); ++i) {
    double p = 0.0;
    for (auto e : inst_.blocks[i - 1]) p += alpha_[e - 1] * alpha_[e - 1];
    block_probs_[i] = p;
    inside += p;
  }
  block_probs_[0] = std::max(0.0, 1.0 - inside);
  readout_cdfs_.resize(inst_.block_count());
}

const std::vector<double>& QuantumSampler::readout_cdf(std::uint32_t block) {
  auto& cdf = readout_cdfs_[block - 1];
  if (cdf.empty()) {
    std::vector<double> state(alpha_.size(), 0.0);
    const double norm = std::sqrt(block_probs_[block]);
    for (auto e : inst_.blocks[block - 1]) state[e - 1] = alpha_[e - 1] / norm;
    gf2::walsh_hadamard(state);
    for (double& a : state) a *= a;
    cdf = to_cdf(state);
  }
  return cdf;
}

QuantumOutcome QuantumSampler::draw(Rng& rng) {
  const auto block = static_cast<std::uint32_t>(draw_from_cdf(to_cdf(block_probs_), rng));
  if (block == 0) return {0, std::nullopt};
  const auto readout = draw_from_cdf(readout_cdf(block), rng);
  return {block, gf2::BitString(pin_answer_bits(inst_.n), readout)};
}

QuantumOutcome run_sampled(const PinInstance& inst, Rng& rng) { return QuantumSampler(inst).draw(rng); }

QuantumOutcome run_sampled(const PinInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  return run_sampled(inst, rng);
}

std::uint32_t repetitions_for(double epsilon) {
  require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
  const double t = std::ceil(std::log(1.0 / epsilon) / std::log(1.5) - 1e-12);
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(t));
}

RepeatedOutcome run_repeated(const PinInstance& inst, double epsilon, Rng& rng) {
  RepeatedOutcome result;
  result.repetitions = repetitions_for(epsilon);
  result.qubits = qubit_cost(inst.n, result.repetitions);
  QuantumSampler sampler(inst);
  // All t copies run (they are sent in parallel); the first answer is kept.
  for (std::uint32_t r = 1; r <= result.repetitions; ++r) {
    auto outcome = sampler.draw(rng);
    if (result.answering_run == 0 && outcome.answered()) {
      result.outcome = outcome;
      result.answering_run = r;
    }
  }
  return result;
}

RepeatedOutcome run_repeated(const PinInstance& inst, double epsilon, std::uint64_t seed) {
  Rng rng(seed);
  return run_repeated(inst, epsilon, rng);
}

std::uint32_t qubit_cost(std::uint32_t n) {
  validate_size(n);
  return static_cast<std::uint32_t>(pin_answer_bits(n));
}

std::uint64_t qubit_cost(std::uint32_t n, std::uint32_t repetitions) {
  return std::uint64_t{qubit_cost(n)} * repetitions;
}

std::optional<gf2::BitString> run_ps_sampled(const Instance& inst, Rng& rng) {
  inst.validate();
  const std::size_t dim = inst.universe();
  const Set common = set_intersection(inst.x, inst.y);
  // Projection onto span{|j> : j in y} succeeds with probability |x ∩ y| / |x|.
  const double p_in = static_cast<double>(common.size()) / static_cast<double>(inst.x.size());
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= p_in) return std::nullopt;
  std::vector<double> state(dim, 0.0);
  const double amp = 1.0 / std::sqrt(static_cast<double>(common.size()));
  for (auto e : common) state[e - 1] = amp;
  gf2::walsh_hadamard(state);
  for (double& a : state) a *= a;
  const auto z = draw_from_cdf(to_cdf(state), rng);
  if (z == 0) return std::nullopt;
  return gf2::BitString(ps_answer_bits(inst.n), z);
}

bool ps_outcome_possible(const Set& x, const Set& y, const gf2::BitString& z) {
  // Amplitude at z is proportional to sum_{j in x ∩ y} (-1)^{<z, sigma0(j)>}.
  long total = 0;
  for (auto e : set_intersection(x, y)) {
    total += gf2::inner_product(z, gf2::sigma0_encode(e, z.length())) ? -1 : 1;
  }
  return total != 0;
}

}  // namespace qsep::quantum
