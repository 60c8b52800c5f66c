#include "qsep/reductions.hpp"

#include "qsep/errors.hpp"
#include "qsep/quantum.hpp"

#include <algorithm>
#include <cmath>

namespace qsep::reductions {

using nlohmann::json;
using protocols::Rectangle;

void ReductionTrace::record(const std::string& label, json data) {
  if (enabled) stages.emplace_back(label, std::move(data));
}

json ReductionTrace::to_json() const {
  json out = json::object();
  json list = json::array();
  for (const auto& [label, data] : stages) list.push_back({{"stage", label}, {"data", data}});
  out["stages"] = list;
  out["verdict"] = verdict;
  return out;
}

namespace {

std::uint32_t bits_for(std::uint64_t count) {
  std::uint32_t bits = 0;
  while (bits < 64 && (std::uint64_t{1} << bits) < count) ++bits;
  return bits;
}

json pin_json(const PinInstance& inst) { return {{"n", inst.n}, {"x", inst.x}, {"blocks", inst.blocks}}; }
json instance_json(const Instance& inst) { return {{"n", inst.n}, {"x", inst.x}, {"y", inst.y}}; }

std::vector<std::uint32_t> identity_permutation(std::size_t size) {
  std::vector<std::uint32_t> perm(size);
  for (std::size_t i = 0; i < size; ++i) perm[i] = static_cast<std::uint32_t>(i + 1);
  return perm;
}

}  // namespace

// Solvers ---------------------------------------------------------------------

std::uint64_t QuantumPinSolver::cost(std::uint32_t n) const { return quantum::qubit_cost(n); }

std::optional<PinAnswer> QuantumPinSolver::solve(const PinInstance& inst, Rng& rng) const {
  const auto outcome = quantum::QuantumSampler(inst).draw(rng);
  if (!outcome.answered()) return std::nullopt;
  return outcome.answer();
}

std::optional<Rational> QuantumPinSolver::answer_rate(std::uint32_t n) const {
  return quantum::closed_form_answer_probability(n);
}

std::uint64_t PerfectPinSolver::cost(std::uint32_t n) const {
  // Alice sends x element by element.
  return std::uint64_t{n} * static_cast<std::uint64_t>(pin_answer_bits(n));
}

std::optional<PinAnswer> PerfectPinSolver::solve(const PinInstance& inst, Rng& rng) const {
  const auto block = static_cast<std::uint32_t>(1 + uniform_index(rng, inst.block_count()));
  const Set common = set_intersection(inst.x, inst.blocks[block - 1]);
  require(common.size() == 2, "block does not meet x in two elements");
  const int bits = pin_answer_bits(inst.n);
  const auto d = gf2::sigma0_encode(common[0], bits) ^ gf2::sigma0_encode(common[1], bits);
  // Rejection: half of all vectors are orthogonal to d.
  for (;;) {
    const gf2::BitString z(bits, uniform_index(rng, std::size_t{1} << bits));
    if (!z.is_zero() && gf2::inner_product(z, d) == 0) return PinAnswer{block, z};
  }
}

std::unique_ptr<PinSolver> make_pin_solver(const std::string& name) {
  if (name == "quantum") return std::make_unique<QuantumPinSolver>();
  if (name == "perfect") return std::make_unique<PerfectPinSolver>();
  if (name == "refuse") return std::make_unique<RefusingPinSolver>();
  throw ContractViolation("unknown Pin solver: " + name);
}

std::unique_ptr<PsRectangleSolver> make_ps_solver(const std::string& name) {
  if (name == "perfect") return std::make_unique<PerfectPsSolver>();
  if (name == "adversarial") return std::make_unique<AdversarialPsSolver>();
  if (name == "quantum") return std::make_unique<QuantumPsSolver>();
  throw ContractViolation("unknown PS solver: " + name);
}

TreePsSolver::TreePsSolver(protocols::ProtocolTree tree) : tree_(std::move(tree)) {
  require(tree_.public_bits() == 0, "rectangle access needs a deterministic tree");
  auto partition = protocols::extract_rectangles(tree_);
  for (std::size_t i = 0; i < partition.transcripts.size(); ++i) {
    by_transcript_[partition.transcripts[i]] = std::make_shared<const Rectangle>(std::move(partition.rectangles[i]));
  }
}

std::shared_ptr<const Rectangle> TreePsSolver::rectangle(const Instance& inst, Rng&) const {
  require(inst.n == tree_.n(), "tree was built for a different n");
  const auto run = protocols::run_protocol(tree_, inst.x, inst.y, 0);
  auto it = by_transcript_.find(run.transcript.key());
  if (it == by_transcript_.end()) throw InvariantFailure("transcript missing from the extracted partition");
  return it->second;
}

std::uint64_t PerfectPsSolver::cost(std::uint32_t n) const { return bits_for(binomial_u64(n * n, n / 2)); }

std::shared_ptr<const Rectangle> PerfectPsSolver::rectangle(const Instance& inst, Rng&) const {
  return std::make_shared<const Rectangle>(Rectangle::singleton(inst.x, inst.y));
}

std::uint64_t AdversarialPsSolver::cost(std::uint32_t n) const { return bits_for(binomial_u64(n * n, n / 2)); }

std::shared_ptr<const Rectangle> AdversarialPsSolver::rectangle(const Instance& inst, Rng&) const {
  const Set y_only = set_difference(inst.y, inst.x);
  require(y_only.size() >= 2, "y needs two elements outside x");
  Set bad{y_only[0], y_only[1]};
  for (std::uint32_t e = 1; bad.size() < inst.x.size() && e <= inst.universe(); ++e) {
    if (!contains(inst.y, e)) bad.push_back(e);
  }
  return std::make_shared<const Rectangle>(Rectangle::singleton(make_set(std::move(bad)), inst.y));
}

std::uint64_t QuantumPsSolver::cost(std::uint32_t n) const { return static_cast<std::uint64_t>(ps_answer_bits(n)); }

std::shared_ptr<const Rectangle> QuantumPsSolver::rectangle(const Instance& inst, Rng& rng) const {
  const auto z = quantum::run_ps_sampled(inst, rng);
  if (!z) return nullptr;
  require(inst.universe() <= 64 && binomial_u64(inst.universe(), inst.n / 2) <= 1'000'000,
          "quantum rectangle needs an enumerable Alice domain");
  auto rect = std::make_shared<Rectangle>();
  for (auto mask : all_subsets_mask(inst.universe(), inst.n / 2)) {
    Set candidate = from_mask(mask);
    if (quantum::ps_outcome_possible(candidate, inst.y, *z)) rect->alice.push_back(std::move(candidate));
  }
  rect->bob.push_back(inst.y);
  return rect;
}

std::optional<Set> PerfectPiipSolver::solve(const Set& x, const Set& y, Rng&) const {
  const Set common = set_intersection(x, y);
  if (common.size() < t_) return std::nullopt;
  return Set(common.begin(), common.begin() + t_);
}

// Pin -> PS -------------------------------------------------------------------

PinInstance in2ii_padded_instance(const Instance& inst) {
  inst.validate();
  const std::uint32_t n = inst.n;
  const std::uint32_t n2 = n * n;
  PinInstance out;
  out.n = n;
  Set x = inst.x;
  for (std::uint32_t j = 1; j <= n / 2; ++j) x.push_back(n2 + j);
  out.x = make_set(std::move(x));
  out.blocks.push_back(inst.y);
  // k runs from 0 so that block j meets the padding in n^2 + j and n^2 + j + n/4.
  for (std::uint32_t j = 1; j < n / 4; ++j) {
    Set block;
    for (std::uint32_t k = 0; k < n; ++k) block.push_back(n2 + j + k * (n / 4));
    out.blocks.push_back(std::move(block));
  }
  out.validate();
  return out;
}

namespace {

In2iiResult run_in2ii(const Instance& inst, const PinSolver& solver, const std::vector<std::uint32_t>& sigma1,
                      const std::vector<std::uint32_t>& sigma2, Rng& rng, bool trace) {
  In2iiResult result;
  result.trace.enabled = trace;
  require(inst.overlap() == 2, "the Pin reduction needs |x ∩ y| = 2");
  const PinInstance padded = in2ii_padded_instance(inst);
  result.trace.record("input", instance_json(inst));
  result.trace.record("padded", pin_json(padded));

  // Block j of the padded instance goes to position sigma2(j).
  result.image.n = inst.n;
  result.image.x = apply_permutation(sigma1, padded.x);
  result.image.blocks.resize(padded.blocks.size());
  for (std::size_t j = 0; j < padded.blocks.size(); ++j) {
    result.image.blocks[sigma2[j] - 1] = apply_permutation(sigma1, padded.blocks[j]);
  }
  result.image.validate();
  result.target_block = sigma2[0];
  result.trace.record("permutations", {{"sigma1", sigma1}, {"sigma2", sigma2}});
  result.trace.record("image", pin_json(result.image));

  result.solver_answer = solver.solve(result.image, rng);
  if (!result.solver_answer) {
    result.trace.verdict = "refuse: solver refused";
  } else if (result.solver_answer->block != result.target_block) {
    result.trace.verdict = "refuse: solver answered another block";
  } else {
    result.answer = In2iiAnswer{sigma1, result.solver_answer->z};
    result.trace.verdict = "answer";
  }
  if (result.solver_answer) {
    result.trace.record("solver_answer",
                        {{"block", result.solver_answer->block}, {"z", result.solver_answer->z.to_string()}});
  }
  return result;
}

struct Relabeling {
  std::vector<std::uint32_t> sigma1, sigma2;
};

Relabeling draw_relabeling(std::uint32_t n, Rng& rng) {
  Relabeling r;
  r.sigma1 = random_permutation(std::size_t{2} * n * n, rng);
  r.sigma2 = random_permutation(n / 4, rng);
  return r;
}

}  // namespace

In2iiResult reduce_in2ii(const Instance& inst, const PinSolver& solver, Rng& rng, In2iiOptions options) {
  inst.validate();
  require(inst.n >= 8, "the Pin reduction needs n >= 8");
  Relabeling r;
  if (options.identity_permutations) {
    r.sigma1 = identity_permutation(std::size_t{2} * inst.n * inst.n);
    r.sigma2 = identity_permutation(inst.n / 4);
  } else {
    r = draw_relabeling(inst.n, rng);
  }
  return run_in2ii(inst, solver, r.sigma1, r.sigma2, rng, options.trace);
}

In2iiResult reduce_in2ii(const Instance& inst, const PinSolver& solver, std::uint64_t seed, In2iiOptions options) {
  Rng rng(seed);
  return reduce_in2ii(inst, solver, rng, options);
}

bool in2ii_answer_correct(const Instance& inst, const In2iiAnswer& answer) {
  return member_ps(inst, answer.z, gf2::SigmaEncoding(pin_answer_bits(inst.n), answer.sigma1));
}

DerandomizeResult derandomize_in2ii(const PinSolver& solver, std::uint32_t n, double epsilon, std::uint64_t budget,
                                    std::uint64_t trials, std::uint64_t seed) {
  validate_size(n);
  require(n >= 8, "the Pin reduction needs n >= 8");
  require(budget >= 1 && trials >= 1, "budget and trials must be positive");
  DerandomizeResult result;

  if (auto exact = solver.answer_rate(n)) {
    result.solver_rate = to_double(*exact);
  } else {
    Rng rng(derive_seed(seed, ~std::uint64_t{0}));
    std::uint64_t answered = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
      if (solver.solve(sample_pin(n, rng, BlockRange::kFull), rng)) ++answered;
    }
    result.solver_rate = static_cast<double>(answered) / static_cast<double>(trials);
  }
  result.threshold = 2.0 / n * result.solver_rate;

  const auto spec = DistributionSpec::exactly(n, 2);
  double best_rate = -1.0;
  for (std::uint64_t c = 0; c < budget; ++c) {
    const std::uint64_t r0 = derive_seed(seed, c);
    Rng choice(r0);
    const Relabeling r = draw_relabeling(n, choice);
    // Instances and solver coins come from a stream independent of r0's role.
    Rng rng(derive_seed(r0, 1));
    std::uint64_t answers = 0, wrong = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
      const Instance inst = sample(spec, rng);
      const auto res = run_in2ii(inst, solver, r.sigma1, r.sigma2, rng, false);
      if (res.answer) {
        ++answers;
        if (!in2ii_answer_correct(inst, *res.answer)) ++wrong;
      }
    }
    result.seeds_tried = c + 1;
    const double rate = static_cast<double>(answers) / static_cast<double>(trials);
    const double error = answers ? static_cast<double>(wrong) / static_cast<double>(answers) : 0.0;
    const bool qualifies = answers > 0 && rate >= result.threshold && error <= 2.0 * epsilon;
    if (qualifies || rate > best_rate) {
      best_rate = rate;
      result.seed = r0;
      result.answer_rate = rate;
      result.error_rate = error;
    }
    if (qualifies) {
      result.found = true;
      break;
    }
  }
  return result;
}

// PS -> Piip ------------------------------------------------------------------

std::vector<Rational> ii2iip_j0_distribution(std::uint32_t n) {
  auto pmf = intersection_pmf(n);
  Rational tail = 0;
  for (std::size_t j = 2; j < pmf.size(); ++j) tail += pmf[j];
  for (std::size_t j = 0; j < pmf.size(); ++j) pmf[j] = j < 2 ? Rational(0) : pmf[j] / tail;
  return pmf;
}

std::uint32_t ii2iip_threshold(double gamma, const Rational& delta) {
  require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  require(delta > 0, "delta must be positive");
  const double value = 3.0 * std::log2(312.0 / (gamma * to_double(delta)));
  return static_cast<std::uint32_t>(std::ceil(value - 1e-12));
}

namespace {

/// Lexicographically smallest index pair (i1 < i2) whose removal from
/// `first` leaves a set disjoint from `other`.
std::pair<std::size_t, std::size_t> removal_pair(const Set& first, const Set& other) {
  for (std::size_t i1 = 0; i1 < first.size(); ++i1) {
    for (std::size_t i2 = i1 + 1; i2 < first.size(); ++i2) {
      bool disjoint = true;
      for (std::size_t k = 0; k < first.size() && disjoint; ++k) {
        if (k != i1 && k != i2 && contains(other, first[k])) disjoint = false;
      }
      if (disjoint) return {i1, i2};
    }
  }
  throw InvariantFailure("no index pair clears the exchanged prefix");
}

Set without(const Set& first, std::pair<std::size_t, std::size_t> drop) {
  Set out;
  for (std::size_t k = 0; k < first.size(); ++k) {
    if (k != drop.first && k != drop.second) out.push_back(first[k]);
  }
  return out;
}

}  // namespace

Ii2iipResult reduce_ii2iip(const Instance& inst, const PsRectangleSolver& solver, Rng& rng, Ii2iipOptions options) {
  inst.validate();
  require(inst.overlap() == 2, "the Piip reduction needs |x ∩ y| = 2");
  Ii2iipResult result;
  auto& trace = result.trace;
  trace.enabled = options.trace;
  trace.record("input", instance_json(inst));

  const std::uint64_t k = std::max<std::uint64_t>(1, solver.cost(inst.n));
  const Rational delta = options.delta.value_or(options.c_delta / Rational(BigInt(k) * k));
  require(delta > 0, "delta must be positive");
  result.threshold = ii2iip_threshold(options.gamma, delta);

  // Step 1: public j0 ~ D.
  result.j0 = static_cast<std::uint32_t>(sample_index(ii2iip_j0_distribution(inst.n), rng));
  trace.record("j0", {{"j0", result.j0}, {"threshold", result.threshold}, {"delta", qsep::to_string(delta)}});
  if (result.j0 > result.threshold) {
    trace.verdict = "refuse: j0 above threshold";
    return result;
  }

  // Steps 1-3: exchange prefixes and build x~.
  const Set x_first(inst.x.begin(), inst.x.begin() + result.j0);
  const Set y_first(inst.y.begin(), inst.y.begin() + result.j0);
  const Set i_x = without(x_first, removal_pair(x_first, inst.y));
  const Set i_y = without(y_first, removal_pair(y_first, inst.x));
  const Set x_tilde = set_difference(set_union(inst.x, i_y), i_x);
  if (x_tilde.size() != inst.x.size() || intersection_size(x_tilde, inst.y) != result.j0) {
    throw InvariantFailure("x~ does not have the expected shape");
  }
  trace.record("exchange", {{"I_x", i_x}, {"I_y", i_y}, {"x_tilde", x_tilde}});

  // Step 4-5: relabel, run the solver, read off its rectangle.
  const auto rho = random_permutation(inst.universe(), rng);
  const auto rho_inv = invert_permutation(rho);
  result.image = Instance{inst.n, apply_permutation(rho, x_tilde), apply_permutation(rho, inst.y)};
  trace.record("image", {{"rho", rho}, {"instance", instance_json(*result.image)}});

  const auto rect = solver.rectangle(*result.image, rng);
  if (!rect || rect->alice.empty()) {
    trace.verdict = "refuse: solver gave no rectangle";
    return result;
  }
  const Set& y_img = result.image->y;
  const std::size_t m = y_img.size();
  std::vector<std::uint64_t> counts(m * m, 0);
  std::vector<std::size_t> hit;
  for (const auto& x : rect->alice) {
    hit.clear();
    for (std::size_t p = 0; p < m; ++p) {
      if (contains(x, y_img[p])) hit.push_back(p);
    }
    for (std::size_t a = 0; a < hit.size(); ++a)
      for (std::size_t b = a + 1; b < hit.size(); ++b) ++counts[hit[a] * m + hit[b]];
  }
  const Rational alice_size(BigInt(rect->alice.size()));
  std::optional<std::pair<std::uint32_t, std::uint32_t>> chosen;
  for (std::size_t a = 0; a < m && !chosen; ++a) {
    for (std::size_t b = a + 1; b < m && !chosen; ++b) {
      if (Rational(BigInt(counts[a * m + b])) >= delta * alice_size) chosen = {{y_img[a], y_img[b]}};
    }
  }
  trace.record("rectangle", {{"alice_size", rect->alice.size()}, {"bob_size", rect->bob.size()}});
  if (!chosen) {
    trace.verdict = "refuse: rectangle is not labeled";
    return result;
  }

  // Step 6: verify the preimage pair.
  const Set preimage = make_set({rho_inv[chosen->first - 1], rho_inv[chosen->second - 1]});
  trace.record("pair", {{"pair", {chosen->first, chosen->second}}, {"preimage", preimage}});
  if (!is_subset(preimage, set_intersection(inst.x, inst.y))) {
    trace.verdict = "refuse: verification failed";
    return result;
  }
  result.answer = preimage;
  trace.verdict = "answer";
  return result;
}

Ii2iipResult reduce_ii2iip(const Instance& inst, const PsRectangleSolver& solver, std::uint64_t seed,
                           Ii2iipOptions options) {
  Rng rng(seed);
  return reduce_ii2iip(inst, solver, rng, options);
}

// Padding and repetition --------------------------------------------------------

std::string to_string(Verdict verdict) { return verdict == Verdict::kZero ? "zero" : "refuse"; }

PaddingResult reduce_iip_padding(std::uint32_t n, const Set& x_prime, const Set& y_prime, std::uint32_t i0,
                                 std::uint32_t t, const PiipSolver& solver, Rng& rng, bool trace) {
  validate_size(n);
  require(t >= 1 && i0 >= t && i0 <= n / 2, "need 1 <= t <= i0 <= n/2");
  const std::uint32_t n2 = n * n;
  const std::uint32_t m = n2 - i0;
  require(x_prime.size() == n / 2 - i0 && y_prime.size() == n - i0, "x', y' have the wrong sizes");
  require((x_prime.empty() || x_prime.back() <= m) && (y_prime.empty() || y_prime.back() <= m),
          "x', y' must lie in [m]");

  PaddingResult result;
  result.trace.enabled = trace;
  Set x0 = x_prime, y0 = y_prime;
  for (std::uint32_t j = m + 1; j <= n2; ++j) {
    x0.push_back(j);
    y0.push_back(j);
  }
  const auto rho = random_permutation(n2, rng);
  result.padded = Instance{n, apply_permutation(rho, make_set(std::move(x0))), apply_permutation(rho, make_set(std::move(y0)))};
  result.padded.validate();
  result.trace.record("input", {{"x_prime", x_prime}, {"y_prime", y_prime}, {"m", m}, {"i0", i0}, {"t", t}});
  result.trace.record("padded", {{"rho", rho}, {"instance", instance_json(result.padded)}});

  const auto out = solver.solve(result.padded.x, result.padded.y, rng);
  if (!out || out->size() != t) {
    result.trace.verdict = "refuse: solver did not output t elements";
    return result;
  }
  const auto rho_inv = invert_permutation(rho);
  const bool all_padding = std::all_of(out->begin(), out->end(), [&](std::uint32_t e) {
    return e >= 1 && e <= n2 && rho_inv[e - 1] > m;
  });
  result.trace.record("solver_output", *out);
  result.verdict = all_padding ? Verdict::kZero : Verdict::kRefuse;
  result.trace.verdict = all_padding ? "zero" : "refuse: an element outside the padding";
  return result;
}

Verdict repeat_iip(std::uint32_t l, const std::function<Verdict(Rng&)>& inner, Rng& rng) {
  require(l >= 1, "need at least one repetition");
  for (std::uint32_t i = 0; i < l; ++i) {
    if (inner(rng) != Verdict::kZero) return Verdict::kRefuse;
  }
  return Verdict::kZero;
}

Verdict repeat_iip(std::uint32_t l, const std::function<Verdict(Rng&)>& inner, std::uint64_t seed) {
  Rng rng(seed);
  return repeat_iip(l, inner, rng);
}

// Embedding T_r ------------------------------------------------------------------

EmbedRandomness draw_embedding(std::uint32_t m, std::uint32_t n, std::uint32_t beta_size, Rng& rng) {
  require(std::uint64_t{m} + beta_size <= n, "M and beta do not fit in [n]");
  const auto perm = random_permutation(n, rng);
  EmbedRandomness r;
  r.injection.assign(perm.begin(), perm.begin() + m);
  r.beta = make_set(std::vector<std::uint32_t>(perm.begin() + m, perm.begin() + m + beta_size));
  return r;
}

Set embed_alice(const Set& x_prime, const EmbedRandomness& r) {
  Set out;
  for (auto e : x_prime) {
    require(e >= 1 && e <= r.injection.size(), "element outside [m]");
    out.push_back(r.injection[e - 1]);
  }
  return make_set(std::move(out));
}

Set embed_bob(const Set& y_prime, const EmbedRandomness& r) { return set_union(embed_alice(y_prime, r), r.beta); }

EmbedResult embed_razlem(const Set& x_prime, const Set& y_prime, std::uint32_t n, std::uint32_t k2, Rng& rng) {
  const auto l = static_cast<std::uint32_t>(x_prime.size());
  require(l >= 1 && y_prime.size() == l, "x' and y' must both have l >= 1 elements");
  require(k2 >= l, "k2 must be at least l");
  const std::uint32_t m = 4 * l - 1;
  EmbedResult result;
  result.r = draw_embedding(m, n, k2 - l, rng);
  result.x = embed_alice(x_prime, result.r);
  result.y = embed_bob(y_prime, result.r);
  return result;
}

}  // namespace qsep::reductions
