#include "qsep/analysis.hpp"

#include "qsep/errors.hpp"
#include "qsep/problems.hpp"
#include "qsep/quantum.hpp"
#include "qsep/sets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace qsep::analysis {

using nlohmann::json;

Estimate Estimate::from_counts(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed, double confidence) {
  Estimate e;
  e.successes = successes;
  e.trials = trials;
  e.point = static_cast<double>(successes) / static_cast<double>(trials);
  e.interval = stats::wilson_interval(successes, trials, confidence);
  e.seed = seed;
  return e;
}

void for_each_trial(std::uint64_t trials, std::uint64_t master, const std::function<void(Rng&)>& trial) {
  for (std::uint64_t start = 0, chunk = 0; start < trials; start += kChunkSize, ++chunk) {
    Rng rng(derive_seed(master, chunk));
    const std::uint64_t end = std::min(trials, start + kChunkSize);
    for (std::uint64_t i = start; i < end; ++i) trial(rng);
  }
}

Estimate monte_carlo(std::uint64_t trials, std::uint64_t master, const std::function<bool(Rng&)>& trial,
                     double confidence) {
  require(trials >= 1, "need at least one trial");
  std::uint64_t hits = 0;
  for_each_trial(trials, master, [&](Rng& rng) { hits += trial(rng) ? 1 : 0; });
  return Estimate::from_counts(hits, trials, master, confidence);
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kInformational:
      return "informational";
  }
  return "informational";
}

Verdict parse_verdict(const std::string& text) {
  if (text == "pass") return Verdict::kPass;
  if (text == "fail") return Verdict::kFail;
  if (text == "informational") return Verdict::kInformational;
  throw ContractViolation("unknown verdict: " + text);
}

std::string library_version() { return QSEP_VERSION; }

namespace {

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string fmt_exact(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Verdict pass_if(bool ok) { return ok ? Verdict::kPass : Verdict::kFail; }

ClaimReport claim(std::string id, std::string expected, std::string measured, Verdict verdict,
                  std::string provenance, std::optional<stats::Interval> interval = std::nullopt) {
  return {std::move(id), std::move(expected), std::move(measured), interval, verdict, std::move(provenance)};
}

const char* kExact = "exact rational";
const char* kMonteCarlo = "monte carlo, Wilson 95%";
const char* kCount = "monte carlo count";
const char* kChiSquare = "monte carlo, chi-square";

// CSV with RFC 4180 quoting.
std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json Report::to_json() const {
  json list = json::array();
  for (const auto& c : claims) {
    json interval = nullptr;
    if (c.interval) interval = json::array({c.interval->lower, c.interval->upper});
    list.push_back({{"id", c.id},
                    {"expected", c.expected},
                    {"measured", c.measured},
                    {"interval", interval},
                    {"verdict", to_string(c.verdict)},
                    {"provenance", c.provenance}});
  }
  json timing = nullptr;
  if (seconds) timing = json{{"seconds", *seconds}};
  return {{"claims", list}, {"meta", {{"seed", seed}, {"version", version}, {"timing", timing}}}};
}

Report Report::from_json(const json& j) {
  Report r;
  for (const auto& c : j.at("claims")) {
    ClaimReport claim;
    claim.id = c.at("id").get<std::string>();
    claim.expected = c.at("expected").get<std::string>();
    claim.measured = c.at("measured").get<std::string>();
    if (!c.at("interval").is_null()) claim.interval = stats::Interval{c["interval"][0], c["interval"][1]};
    claim.verdict = parse_verdict(c.at("verdict").get<std::string>());
    claim.provenance = c.at("provenance").get<std::string>();
    r.claims.push_back(std::move(claim));
  }
  const auto& meta = j.at("meta");
  r.seed = meta.at("seed").get<std::uint64_t>();
  r.version = meta.at("version").get<std::string>();
  if (!meta.at("timing").is_null()) r.seconds = meta["timing"].at("seconds").get<double>();
  return r;
}

std::string Report::to_csv() const {
  std::ostringstream out;
  out << "# seed=" << seed << " version=" << version;
  if (seconds) out << " seconds=" << fmt_exact(*seconds);
  out << "\nid,expected,measured,lower,upper,verdict,provenance\n";
  for (const auto& c : claims) {
    out << csv_field(c.id) << ',' << csv_field(c.expected) << ',' << csv_field(c.measured) << ','
        << (c.interval ? fmt_exact(c.interval->lower) : "") << ',' << (c.interval ? fmt_exact(c.interval->upper) : "")
        << ',' << to_string(c.verdict) << ',' << csv_field(c.provenance) << '\n';
  }
  return out.str();
}

Report Report::from_csv(const std::string& text) {
  Report r;
  const auto newline = text.find('\n');
  require(text.rfind("# seed=", 0) == 0 && newline != std::string::npos, "CSV report needs a seed header line");
  std::istringstream header(text.substr(2, newline - 2));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    require(eq != std::string::npos, "malformed CSV header");
    const auto key = token.substr(0, eq), value = token.substr(eq + 1);
    if (key == "seed") r.seed = std::stoull(value);
    else if (key == "version") r.version = value;
    else if (key == "seconds") r.seconds = std::stod(value);
  }
  auto rows = parse_csv(text.substr(newline + 1));
  require(!rows.empty() && rows[0].size() == 7 && rows[0][0] == "id", "CSV report needs a column header");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    require(row.size() == 7, "CSV row needs 7 fields");
    ClaimReport c;
    c.id = row[0];
    c.expected = row[1];
    c.measured = row[2];
    if (!row[3].empty()) c.interval = stats::Interval{std::stod(row[3]), std::stod(row[4])};
    c.verdict = parse_verdict(row[5]);
    c.provenance = row[6];
    r.claims.push_back(std::move(c));
  }
  return r;
}

bool Report::all_pass() const {
  return std::none_of(claims.begin(), claims.end(), [](const ClaimReport& c) { return c.verdict == Verdict::kFail; });
}

void Report::append(const std::vector<ClaimReport>& more) { claims.insert(claims.end(), more.begin(), more.end()); }

// Exact validators ----------------------------------------------------------------

namespace {

struct CxBound {
  const char* id;
  std::uint32_t j;
  Rational bound;
};

std::vector<CxBound> cx_bounds() {
  return {{"cX.X0", 0, Rational(1, 3)}, {"cX.X1", 1, Rational(1, 6)}, {"cX.X2", 2, Rational(1, 13)}};
}

}  // namespace

std::vector<ClaimReport> validate_claim_cx(std::uint32_t n) {
  validate_size(n);
  const auto pmf = intersection_pmf(n);
  std::vector<ClaimReport> out;
  const std::string at = "@n=" + std::to_string(n);
  for (const auto& b : cx_bounds()) {
    const bool ok = pmf[b.j] >= b.bound;
    // Asymptotic statement: a miss at small n is reported, not failed.
    out.push_back(claim(b.id + at, ">= " + qsep::to_string(b.bound), qsep::to_string(pmf[b.j]),
                        ok ? Verdict::kPass : Verdict::kInformational, kExact));
  }
  for (std::uint32_t t = 1; t <= n / 2; ++t) {
    const auto check = tail_bound_check(n, t);
    out.push_back(claim("cX.tail" + at + ",t=" + std::to_string(t), "<= " + qsep::to_string(check.bound),
                        qsep::to_string(check.tail), pass_if(check.pass), kExact));
  }
  return out;
}

std::vector<CxThreshold> claim_cx_thresholds(const std::vector<std::uint32_t>& sizes) {
  std::vector<std::uint32_t> ns = sizes;
  std::sort(ns.begin(), ns.end());
  std::vector<CxThreshold> out;
  for (const auto& b : cx_bounds()) {
    CxThreshold th{b.id, std::nullopt};
    // Walk down from the largest n while the inequality keeps holding.
    for (std::size_t i = ns.size(); i-- > 0;) {
      if (intersection_pmf(ns[i])[b.j] >= b.bound) th.threshold = ns[i];
      else break;
    }
    out.push_back(th);
  }
  return out;
}

std::vector<ClaimReport> validate_claim_cx_sweep(const std::vector<std::uint32_t>& sizes) {
  std::vector<ClaimReport> out;
  std::string tested;
  for (auto n : sizes) tested += (tested.empty() ? "" : " ") + std::to_string(n);
  for (const auto& th : claim_cx_thresholds(sizes)) {
    const std::string measured = th.threshold ? std::to_string(*th.threshold) : "none";
    out.push_back(claim(th.id + ".threshold", "<= 16 (tested n: " + tested + ")", measured,
                        pass_if(th.threshold && *th.threshold <= 16), kExact));
  }
  // Trend over the sweep and the large-n limit: |x ∩ y| tends to Poisson(1/2).
  std::vector<std::uint32_t> ns = sizes;
  std::sort(ns.begin(), ns.end());
  const auto bounds = cx_bounds();
  for (const auto& b : bounds) {
    bool up = true, down = true;
    for (std::size_t i = 1; i < ns.size(); ++i) {
      const auto prev = intersection_pmf(ns[i - 1])[b.j], cur = intersection_pmf(ns[i])[b.j];
      up = up && cur > prev;
      down = down && cur < prev;
    }
    out.push_back(claim(std::string(b.id) + ".trend", "monotone in n", up ? "increasing" : down ? "decreasing" : "mixed",
                        Verdict::kInformational, kExact));
    double limit = std::exp(-0.5);
    for (std::uint32_t k = 1; k <= b.j; ++k) limit *= 0.5 / k;
    out.push_back(claim(std::string(b.id) + ".limit", "compare with " + qsep::to_string(b.bound) + " = " +
                        fmt(to_double(b.bound)), fmt(limit), Verdict::kInformational, "closed form limit"));
  }
  return out;
}

std::vector<ClaimReport> validate_quantum(std::uint32_t n, std::uint64_t seed, std::uint32_t instances) {
  validate_size(n);
  require(n <= 64, "exact quantum validation is limited to n <= 64");
  require(instances >= 1, "need at least one instance");
  const Rational p_block(2, n);
  const Rational closed = quantum::closed_form_answer_probability(n);
  bool p0_ok = true, pi_ok = true, answer_ok = true, total_ok = true, uniform_ok = true;
  std::uint64_t violations = 0, outcomes = 0;
  Rational answer;
  for (std::uint32_t k = 0; k < instances; ++k) {
    const auto inst = sample_pin(n, derive_seed(seed, k));
    const auto dist = quantum::run_exact(inst);
    const auto& blocks = dist.block_probabilities();
    p0_ok = p0_ok && blocks[0] == Rational(1, 2);
    for (std::size_t i = 1; i < blocks.size(); ++i) pi_ok = pi_ok && blocks[i] == p_block;
    answer = dist.answer_probability();
    answer_ok = answer_ok && answer == closed;
    total_ok = total_ok && dist.total() == 1;
    uniform_ok = uniform_ok && dist.conditional_readout_uniform(inst);
    for (const auto& [outcome, p] : dist.support()) {
      if (!outcome.answered()) continue;
      ++outcomes;
      if (!member_pin(inst, outcome.answer())) ++violations;
    }
  }
  const std::string at = "@n=" + std::to_string(n);
  const std::string over = " over " + std::to_string(instances) + " instance(s)";
  return {
      claim("quantum.p0" + at, "= 1/2", p0_ok ? "1/2" + over : "mismatch", pass_if(p0_ok), kExact),
      claim("quantum.p_i" + at, "= " + qsep::to_string(p_block), pi_ok ? qsep::to_string(p_block) + over : "mismatch",
            pass_if(pi_ok), kExact),
      claim("quantum.total" + at, "= 1", total_ok ? "1" : "mismatch", pass_if(total_ok), kExact),
      claim("quantum.answer_prob" + at, "= " + qsep::to_string(closed), qsep::to_string(answer), pass_if(answer_ok), kExact),
      claim("quantum.answer_gt_third" + at, "> 1/3", qsep::to_string(answer), pass_if(answer > Rational(1, 3)), kExact),
      claim("quantum.readout_uniform" + at, "uniform on the orthogonal complement",
            uniform_ok ? "uniform" : "not uniform", pass_if(uniform_ok), kExact),
      claim("quantum.zero_error" + at, "0 violations",
            std::to_string(violations) + " of " + std::to_string(outcomes) + " answered outcomes",
            pass_if(violations == 0), kExact),
  };
}

// Monte Carlo measurements --------------------------------------------------------

namespace {

ClaimReport within_sigma(const std::string& id, double expected, const std::string& expected_text,
                         const Estimate& e, double k = 3.0) {
  const double sigma = stats::binomial_sigma(expected, e.trials);
  const bool ok = std::abs(e.point - expected) <= k * sigma;
  return claim(id, expected_text + " within " + fmt(k) + " sigma", fmt(e.point), pass_if(ok), kMonteCarlo,
               e.interval);
}

}  // namespace

std::vector<ClaimReport> measure_quantum_sampled(std::uint32_t n, std::uint64_t trials, std::uint64_t seed) {
  validate_size(n);
  require(trials >= 1, "need at least one trial");
  const auto inst = sample_pin(n, seed);
  quantum::QuantumSampler sampler(inst);
  std::uint64_t rejects = 0, answered = 0, violations = 0;
  for_each_trial(trials, derive_seed(seed, 1), [&](Rng& rng) {
    const auto outcome = sampler.draw(rng);
    if (outcome.block == 0) ++rejects;
    if (outcome.answered()) {
      ++answered;
      if (!member_pin(inst, outcome.answer())) ++violations;
    }
  });
  const std::string at = "@n=" + std::to_string(n);
  const auto closed = quantum::closed_form_answer_probability(n);
  return {
      within_sigma("quantum.sampled.p0" + at, 0.5, "1/2", Estimate::from_counts(rejects, trials, seed)),
      within_sigma("quantum.sampled.answer_rate" + at, to_double(closed), qsep::to_string(closed),
                   Estimate::from_counts(answered, trials, seed)),
      claim("quantum.sampled.zero_error" + at, "0 violations",
            std::to_string(violations) + " of " + std::to_string(answered) + " answers", pass_if(violations == 0),
            kCount),
  };
}

std::vector<ClaimReport> measure_repetition(std::uint32_t n, double epsilon, std::uint64_t trials,
                                            std::uint64_t seed) {
  validate_size(n);
  require(trials >= 1, "need at least one trial");
  const auto inst = sample_pin(n, seed);
  const auto t = quantum::repetitions_for(epsilon);
  std::uint64_t refused = 0, violations = 0, qubits = 0;
  bool qubits_constant = true;
  for_each_trial(trials, derive_seed(seed, 1), [&](Rng& rng) {
    const auto result = quantum::run_repeated(inst, epsilon, rng);
    if (qubits == 0) qubits = result.qubits;
    qubits_constant = qubits_constant && result.qubits == qubits;
    if (!result.outcome.answered()) {
      ++refused;
    } else if (!member_pin(inst, result.outcome.answer())) {
      ++violations;
    }
  });
  const auto e = Estimate::from_counts(refused, trials, seed);
  const double sigma = stats::binomial_sigma(epsilon, trials);
  const std::uint64_t expected_qubits = std::uint64_t{t} * (2 * static_cast<std::uint64_t>(log2_n(n)) + 1);
  const Rational refuse_one = Rational(1) - quantum::closed_form_answer_probability(n);
  Rational exact_refusal = 1;
  for (std::uint32_t k = 0; k < t; ++k) exact_refusal *= refuse_one;
  const std::string at = "@n=" + std::to_string(n) + ",eps=" + fmt(epsilon);
  return {
      claim("repetition.refusal_rate" + at, "<= " + fmt(epsilon) + " + 3 sigma", fmt(e.point),
            pass_if(e.point <= epsilon + 3 * sigma), kMonteCarlo, e.interval),
      claim("repetition.exact_refusal" + at, "(1 - answer prob)^t", qsep::to_string(exact_refusal) + " (t=" +
            std::to_string(t) + ")", Verdict::kInformational, kExact),
      claim("repetition.qubits" + at, std::to_string(expected_qubits), std::to_string(qubits),
            pass_if(qubits_constant && qubits == expected_qubits), kExact),
      claim("repetition.zero_error" + at, "0 violations", std::to_string(violations), pass_if(violations == 0),
            kCount),
  };
}

std::vector<ClaimReport> measure_in2ii(std::uint32_t n, const reductions::PinSolver& solver, std::uint64_t trials,
                                       std::uint64_t seed) {
  validate_size(n);
  require(trials >= 1, "need at least one trial");
  const std::string at = "@n=" + std::to_string(n) + ",solver=" + solver.name();

  // Solver answer rate on uniform Pin instances: exact when known.
  double solver_rate = 0.0;
  std::optional<stats::Interval> solver_interval;
  if (auto exact = solver.answer_rate(n)) {
    solver_rate = to_double(*exact);
  } else {
    const auto e = monte_carlo(trials, derive_seed(seed, 2), [&](Rng& rng) {
      return solver.solve(sample_pin(n, rng, BlockRange::kFull), rng).has_value();
    });
    solver_rate = e.point;
    solver_interval = e.interval;
  }

  // Where element 1 of the relabeled instance lands: in x and block p, in
  // block p only, in x only, or nowhere.
  const std::uint32_t blocks = n / 4;
  std::vector<std::uint64_t> cells(2 * blocks + 2, 0);
  std::uint64_t answers = 0, wrong = 0;
  const auto spec = DistributionSpec::exactly(n, 2);
  for_each_trial(trials, derive_seed(seed, 1), [&](Rng& rng) {
    const Instance inst = sample(spec, rng);
    const auto res = reductions::reduce_in2ii(inst, solver, rng);
    if (res.answer) {
      ++answers;
      if (!reductions::in2ii_answer_correct(inst, *res.answer)) ++wrong;
    }
    std::size_t cell = 2 * blocks + 1;
    const bool in_x = contains(res.image.x, 1);
    for (std::uint32_t p = 0; p < blocks; ++p) {
      if (contains(res.image.blocks[p], 1)) cell = in_x ? 2 * p : 2 * p + 1;
    }
    if (cell == 2 * blocks + 1 && in_x) cell = 2 * blocks;
    ++cells[cell];
  });
  const double universe = 2.0 * n * n;
  std::vector<double> expected;
  for (std::uint32_t p = 0; p < blocks; ++p) {
    expected.push_back(2.0 / universe);
    expected.push_back((n - 2.0) / universe);
  }
  expected.push_back((n / 2.0) / universe);
  expected.push_back((universe - blocks * n - n / 2.0) / universe);

  const auto e = Estimate::from_counts(answers, trials, seed, 0.99);
  const double target = 4.0 / n * solver_rate;
  const auto chi = stats::chi_square(cells, expected);
  std::vector<ClaimReport> out;
  out.push_back(claim("in2ii.solver_rate" + at, "solver answer rate on uniform Pin instances", fmt(solver_rate),
                      Verdict::kInformational, solver_interval ? kMonteCarlo : kExact, solver_interval));
  out.push_back(claim("in2ii.answer_rate" + at, "(4/n) * solver rate = " + fmt(target) + " inside 99% Wilson",
                      fmt(e.point), pass_if(e.interval.contains(target)), "monte carlo, Wilson 99%", e.interval));
  // Every stock Pin solver is zero-error, so the kept answers must be too.
  out.push_back(claim("in2ii.errors" + at, "0 wrong answers", std::to_string(wrong) + " of " + std::to_string(answers),
                      pass_if(wrong == 0), kCount));
  out.push_back(claim("in2ii.image_chi2" + at, "p > 0.001", "chi2=" + fmt(chi.statistic) + " dof=" +
                      std::to_string(chi.degrees_of_freedom) + " p=" + fmt(chi.p_value),
                      pass_if(chi.p_value > 0.001), kChiSquare));
  return out;
}

std::vector<ClaimReport> measure_iip_padding(std::uint32_t n, std::uint32_t t, std::uint32_t i0, std::uint64_t trials,
                                             std::uint64_t seed) {
  validate_size(n);
  require(trials >= 1, "need at least one trial");
  require(t >= 1 && t <= i0 && i0 < n / 2, "need 1 <= t <= i0 < n/2");
  const reductions::PerfectPiipSolver solver(t);
  const std::uint32_t m = n * n - i0;
  auto rate = [&](std::uint32_t overlap, std::uint64_t stream) {
    return monte_carlo(trials, derive_seed(seed, stream), [&](Rng& rng) {
      auto [xp, yp] = sample_pair_with_overlap(m, n / 2 - i0, n - i0, overlap, rng);
      return reductions::reduce_iip_padding(n, xp, yp, i0, t, solver, rng).verdict == reductions::Verdict::kZero;
    });
  };
  const auto r0 = rate(0, 1);
  const auto r1 = rate(1, 2);
  const Rational factor = Rational(1) - Rational(t, i0 + 1);
  const double expected_ratio = to_double(factor);
  const std::string at = "@n=" + std::to_string(n) + ",t=" + std::to_string(t) + ",i0=" + std::to_string(i0);

  std::vector<ClaimReport> out;
  out.push_back(within_sigma("iip_pad.rate_x0" + at, 1.0, "1 (perfect solver)", r0));
  out.push_back(within_sigma("iip_pad.rate_x1" + at, expected_ratio, qsep::to_string(factor), r1));
  if (r0.point > 0.0) {
    // Delta method on the ratio of two independent proportions.
    const double ratio = r1.point / r0.point;
    const double v1 = r1.point * (1 - r1.point) / static_cast<double>(trials);
    const double v0 = r0.point * (1 - r0.point) / static_cast<double>(trials);
    double rel = v0 / (r0.point * r0.point);
    if (r1.point > 0) rel += v1 / (r1.point * r1.point);
    const double sigma = ratio * std::sqrt(rel);
    const double sigma_floor = stats::binomial_sigma(expected_ratio, trials) / r0.point;
    const double tol = 3.0 * std::max(sigma, sigma_floor);
    out.push_back(claim("iip_pad.ratio" + at, qsep::to_string(factor) + " within 3 sigma", fmt(ratio),
                        pass_if(std::abs(ratio - expected_ratio) <= tol), "monte carlo, delta method",
                        stats::Interval{ratio - tol, ratio + tol}));
  } else {
    out.push_back(claim("iip_pad.ratio" + at, qsep::to_string(factor), "undefined (no zero verdicts on X0)",
                        Verdict::kFail, kCount));
  }
  out.push_back(claim("iip_pad.gap" + at, "rate(X0) > rate(X1)", fmt(r0.point) + " vs " + fmt(r1.point),
                      pass_if(r0.point > r1.point), kCount));
  return out;
}

std::vector<ClaimReport> measure_ii2iip(std::uint32_t n, const reductions::PsRectangleSolver& solver,
                                        std::uint64_t trials, std::uint64_t seed) {
  validate_size(n);
  require(trials >= 1, "need at least one trial");
  const auto spec = DistributionSpec::exactly(n, 2);
  std::uint64_t answers = 0, wrong = 0, images = 0;
  // At n = 4, j0 is always 2, so the solver's input should be uniform on X_2.
  const bool tally = n == 4;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> cells;
  for_each_trial(trials, derive_seed(seed, 1), [&](Rng& rng) {
    const Instance inst = sample(spec, rng);
    const auto res = reductions::reduce_ii2iip(inst, solver, rng);
    if (res.answer) {
      ++answers;
      if (!member_piip(inst, *res.answer)) ++wrong;
    }
    if (tally && res.image) {
      ++images;
      if (res.image->overlap() == 2) ++cells[{subset_rank(res.image->x, 16), subset_rank(res.image->y, 16)}];
      else ++cells[{~0ull, 0}];
    }
  });
  const std::string at = "@n=" + std::to_string(n) + ",solver=" + solver.name();
  const auto e = Estimate::from_counts(answers, trials, seed);
  std::vector<ClaimReport> out{
      claim("ii2iip.answer_rate" + at, "measured", fmt(e.point), Verdict::kInformational, kMonteCarlo, e.interval),
      claim("ii2iip.zero_error" + at, "0 wrong answers", std::to_string(wrong) + " of " + std::to_string(answers),
            pass_if(wrong == 0), kCount),
  };
  if (tally && images > 0) {
    const std::uint64_t support = binomial_u64(16, 2) * binomial_u64(14, 2);
    std::vector<std::uint64_t> observed;
    for (const auto& [key, c] : cells) observed.push_back(c);
    const bool in_support = cells.count({~0ull, 0}) == 0 && observed.size() <= support;
    if (in_support) {
      observed.resize(support, 0);
      const auto chi = stats::chi_square(observed, std::vector<double>(support, 1.0));
      out.push_back(claim("ii2iip.image_chi2" + at, "p > 0.001 over " + std::to_string(support) + " X_2 pairs",
                          "chi2=" + fmt(chi.statistic) + " dof=" + std::to_string(chi.degrees_of_freedom) +
                              " p=" + fmt(chi.p_value),
                          pass_if(chi.p_value > 0.001), kChiSquare));
    } else {
      out.push_back(claim("ii2iip.image_chi2" + at, "images inside X_2", "image outside X_2", Verdict::kFail,
                          kCount));
    }
  }
  return out;
}

std::vector<ClaimReport> measure_embedding(std::uint32_t l, std::uint32_t n, std::uint32_t k2, std::uint64_t trials,
                                           std::uint64_t seed) {
  require(l >= 1 && k2 >= l, "need 1 <= l <= k2");
  const std::uint32_t m = 4 * l - 1;
  require(m + (k2 - l) <= n && n <= 64, "embedding needs 4l - 1 + k2 - l <= n <= 64");
  require(trials >= 1, "need at least one trial");
  const std::string at = "@l=" + std::to_string(l) + ",n=" + std::to_string(n) + ",k2=" + std::to_string(k2);
  std::vector<ClaimReport> out;
  std::uint64_t preserve_bad = 0, local_bad = 0;
  for (std::uint32_t j = 0; j <= 1; ++j) {
    // Image pairs are keyed by (rank x, rank y); unseen cells count as zero.
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> hits;
    for_each_trial(trials, derive_seed(seed, j), [&](Rng& rng) {
      auto [xp, yp] = sample_pair_with_overlap(m, l, l, j, rng);
      const auto e = reductions::embed_razlem(xp, yp, n, k2, rng);
      if (intersection_size(e.x, e.y) != j) ++preserve_bad;
      Set image_m(e.r.injection.begin(), e.r.injection.end());
      image_m = make_set(std::move(image_m));
      const bool local = e.x == reductions::embed_alice(xp, e.r) && e.y == reductions::embed_bob(yp, e.r) &&
                         is_subset(e.x, image_m) && set_difference(e.y, image_m) == e.r.beta &&
                         intersection_size(e.r.beta, image_m) == 0 && e.x.size() == l && e.y.size() == k2;
      if (!local) ++local_bad;
      ++hits[{subset_rank(e.x, n), subset_rank(e.y, n)}];
    });
    const std::uint64_t cells = binomial_u64(n, l) * binomial_u64(l, j) * binomial_u64(n - l, k2 - j);
    if (cells > 1'000'000) continue;
    std::vector<std::uint64_t> observed;
    for (const auto& [key, c] : hits) observed.push_back(c);
    if (observed.size() > cells) {
      ++preserve_bad;
      continue;
    }
    observed.resize(cells, 0);
    const auto chi = stats::chi_square(observed, std::vector<double>(cells, 1.0));
    out.push_back(claim("embed.uniform_image.X" + std::to_string(j) + at,
                        "p > 0.001 over " + std::to_string(cells) + " target pairs",
                        "chi2=" + fmt(chi.statistic) + " dof=" + std::to_string(chi.degrees_of_freedom) +
                            " p=" + fmt(chi.p_value),
                        pass_if(chi.p_value > 0.001), kChiSquare));
  }
  out.insert(out.begin(), claim("embed.locality" + at, "0 violations", std::to_string(local_bad) + " of " +
                                std::to_string(2 * trials), pass_if(local_bad == 0), kCount));
  out.insert(out.begin(), claim("embed.intersection" + at, "0 violations", std::to_string(preserve_bad) + " of " +
                                std::to_string(2 * trials), pass_if(preserve_bad == 0), kCount));
  return out;
}

ChernoffPoint chernoff_rate(std::uint32_t m, double alpha, double mu, double c, std::uint64_t trials,
                            std::uint64_t seed) {
  require(m >= 1, "need m >= 1");
  require(alpha > 0.0 && mu >= 0.0 && mu <= alpha, "need 0 <= mu <= alpha");
  require(c > 0.0, "need c > 0");
  std::binomial_distribution<std::uint32_t> bin(m, mu / alpha);
  const double threshold = (1.0 + c) * mu * m;
  const auto e = monte_carlo(trials, seed, [&](Rng& rng) { return alpha * bin(rng) >= threshold - 1e-12 * threshold; });
  return {m, e};
}

std::optional<double> chernoff_slope(const std::vector<ChernoffPoint>& points) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : points) {
    if (p.rate.successes > 0) xy.emplace_back(p.m, std::log2(p.rate.point));
  }
  if (xy.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (auto [x, y] : xy) mx += x, my += y;
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double sxy = 0, sxx = 0;
  for (auto [x, y] : xy) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  if (sxx == 0) return std::nullopt;
  return sxy / sxx;
}

ClaimReport chernoff_empirical(std::uint32_t m, double alpha, double mu, std::uint64_t trials, std::uint64_t seed,
                               double c) {
  const auto p = chernoff_rate(m, alpha, mu, c, trials, seed);
  return claim("cher.rate@m=" + std::to_string(m), "decays like 2^(-Omega(m mu / alpha))", fmt(p.rate.point),
               Verdict::kInformational, kMonteCarlo, p.rate.interval);
}

std::vector<ClaimReport> chernoff_sweep(const std::vector<std::uint32_t>& ms, double alpha, double mu,
                                        std::uint64_t trials, std::uint64_t seed, double c) {
  std::vector<ClaimReport> out;
  std::vector<ChernoffPoint> points;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    points.push_back(chernoff_rate(ms[i], alpha, mu, c, trials, derive_seed(seed, i)));
    out.push_back(claim("cher.rate@m=" + std::to_string(ms[i]), "decays like 2^(-Omega(m mu / alpha))",
                        fmt(points.back().rate.point), Verdict::kInformational, kMonteCarlo,
                        points.back().rate.interval));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < points.size(); ++i) monotone = monotone && points[i].rate.point <= points[i - 1].rate.point;
  out.push_back(claim("cher.monotone", "non-increasing in m", monotone ? "yes" : "no", Verdict::kInformational,
                      kCount));
  const auto slope = chernoff_slope(points);
  out.push_back(claim("cher.slope", "negative slope of log2(rate) in m", slope ? fmt(*slope) : "undefined",
                      Verdict::kInformational, "least squares"));
  return out;
}

// Experiments ------------------------------------------------------------------

std::vector<std::string> experiment_ids() { return {"empty", "all-exact", "separation-demo"}; }

namespace {

std::vector<ClaimReport> separation_demo(const ExperimentConfig& config) {
  const std::uint32_t n = 8;
  const int bits = pin_answer_bits(n);
  std::vector<ClaimReport> out;

  // Quantum one-way protocol on fresh instances.
  std::uint64_t q_answered = 0, q_wrong = 0;
  for_each_trial(config.trials, derive_seed(config.seed, 1), [&](Rng& rng) {
    const auto inst = sample_pin(n, rng);
    const auto outcome = quantum::QuantumSampler(inst).draw(rng);
    if (outcome.answered()) {
      ++q_answered;
      if (!member_pin(inst, outcome.answer())) ++q_wrong;
    }
  });
  const auto q = Estimate::from_counts(q_answered, config.trials, config.seed);
  out.push_back(claim("separation.quantum.answer_rate@n=8", ">= 1/3 (Wilson lower bound)", fmt(q.point),
                      pass_if(q.interval.lower >= 1.0 / 3.0), kMonteCarlo, q.interval));
  out.push_back(claim("separation.quantum.errors@n=8", "0", std::to_string(q_wrong), pass_if(q_wrong == 0),
                      kCount));
  out.push_back(claim("separation.quantum.cost@n=8", std::to_string(bits) + " qubits",
                      std::to_string(quantum::qubit_cost(n)), pass_if(quantum::qubit_cost(n) == 7), kExact));

  // Classical baselines: Alice sends x outright, or Bob guesses with no message.
  const reductions::PerfectPinSolver full;
  std::uint64_t f_correct = 0, g_correct = 0, g_wrong = 0;
  for_each_trial(config.trials, derive_seed(config.seed, 2), [&](Rng& rng) {
    const auto inst = sample_pin(n, rng);
    const auto a = full.solve(inst, rng);
    if (a && member_pin(inst, *a)) ++f_correct;
    const auto block = static_cast<std::uint32_t>(1 + uniform_index(rng, inst.block_count()));
    const gf2::BitString z(bits, 1 + uniform_index(rng, (std::size_t{1} << bits) - 1));
    if (member_pin(inst, {block, z})) ++g_correct;
    else ++g_wrong;
  });
  const auto f = Estimate::from_counts(f_correct, config.trials, config.seed);
  const auto g = Estimate::from_counts(g_correct, config.trials, config.seed);
  out.push_back(claim("separation.full_information.success@n=8", "1", fmt(f.point), Verdict::kInformational,
                      kMonteCarlo, f.interval));
  out.push_back(claim("separation.full_information.cost@n=8", "bits", std::to_string(full.cost(n)),
                      Verdict::kInformational, kExact));
  out.push_back(claim("separation.random_guess.success@n=8", "measured", fmt(g.point), Verdict::kInformational,
                      kMonteCarlo, g.interval));
  out.push_back(claim("separation.random_guess.errors@n=8", "measured",
                      std::to_string(g_wrong) + " of " + std::to_string(config.trials), Verdict::kInformational,
                      kCount));
  out.push_back(claim("separation.random_guess.cost@n=8", "bits", "0", Verdict::kInformational, kExact));
  return out;
}

}  // namespace

Report run_experiment(const std::string& id, const ExperimentConfig& config) {
  Report report;
  report.seed = config.seed;
  report.version = library_version();
  if (id == "empty") return report;
  if (id == "all-exact") {
    const std::vector<std::uint32_t> sizes{4, 8, 16, 32, 64};
    for (auto n : sizes) report.append(validate_claim_cx(n));
    report.append(validate_claim_cx_sweep(sizes));
    for (auto n : {4u, 8u, 16u, 32u}) report.append(validate_quantum(n, config.seed));
    return report;
  }
  if (id == "separation-demo") {
    require(config.trials >= 1, "need at least one trial");
    report.append(separation_demo(config));
    return report;
  }
  throw ContractViolation("unknown experiment: " + id);
}

}  // namespace qsep::analysis
