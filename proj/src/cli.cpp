#include "qsep/cli.hpp"

#include "qsep/analysis.hpp"
#include "qsep/errors.hpp"
#include "qsep/problems.hpp"
#include "qsep/protocols.hpp"
#include "qsep/quantum.hpp"
#include "qsep/reductions.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace qsep::cli {

using nlohmann::json;
using analysis::ClaimReport;
using analysis::Report;
using analysis::Verdict;

std::uint64_t default_seed() {
  const char* text = std::getenv(kSeedVariable);
  if (text == nullptr || *text == '\0') return kFallbackSeed;
  const std::string s(text);
  require(s.find_first_not_of("0123456789") == std::string::npos && s.size() <= 20,
          std::string(kSeedVariable) + " must be an unsigned 64-bit integer");
  try {
    return std::stoull(s);
  } catch (const std::out_of_range&) {
    throw ContractViolation(std::string(kSeedVariable) + " is out of range");
  }
}

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string output;
  bool timing = false;
};

// What a subcommand produces: the claim report plus JSON-only details.
struct Outcome {
  Report report;
  json details;
};

constexpr std::uint64_t kMaxTraces = 100;

std::string fmt(double value) {
  std::ostringstream s;
  s.precision(6);
  s << value;
  return s.str();
}

ClaimReport info(std::string id, std::string expected, std::string measured, std::string provenance) {
  return {std::move(id), std::move(expected), std::move(measured), std::nullopt, Verdict::kInformational,
          std::move(provenance)};
}

ClaimReport check(std::string id, std::string expected, std::string measured, bool ok, std::string provenance) {
  return {std::move(id), std::move(expected), std::move(measured), std::nullopt,
          ok ? Verdict::kPass : Verdict::kFail, std::move(provenance)};
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ContractViolation(path + ": " + e.what());
  }
}

// quantum ----------------------------------------------------------------------

struct QuantumArgs {
  std::uint32_t n = 8;
  std::string mode = "exact";
  std::uint64_t trials = 100'000;
  std::uint32_t instances = 1;
};

Outcome cmd_quantum(const QuantumArgs& a, const Common& c) {
  validate_size(a.n);
  Outcome o;
  if (a.mode == "sampled") {
    require(a.trials >= 1, "--trials must be positive");
    o.report.append(analysis::measure_quantum_sampled(a.n, a.trials, c.seed));
    return o;
  }
  require(a.n <= 64, "exact mode supports n <= 64");
  const auto inst = sample_pin(a.n, derive_seed(c.seed, 0));
  const auto dist = quantum::run_exact(inst);
  const std::string at = "@n=" + std::to_string(a.n);
  json blocks = json::array();
  const auto& probs = dist.block_probabilities();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const Rational expected = i == 0 ? Rational(1, 2) : Rational(2, a.n);
    blocks.push_back(qsep::to_string(probs[i]));
    o.report.claims.push_back(check("quantum.block[" + std::to_string(i) + "]" + at, "= " + qsep::to_string(expected),
                                    qsep::to_string(probs[i]), probs[i] == expected, "exact rational"));
  }
  o.report.append(analysis::validate_quantum(a.n, c.seed, a.instances));
  o.details = {{"instance", to_json(inst)},
               {"block_probabilities", blocks},
               {"answer_probability", qsep::to_string(dist.answer_probability())},
               {"support_size", dist.support().size()}};
  return o;
}

// validate ---------------------------------------------------------------------

struct ValidateArgs {
  std::string suite = "all";
  std::uint32_t n = 8;
};

Outcome cmd_validate(const ValidateArgs& a, const Common& c) {
  validate_size(a.n);
  Outcome o;
  if (a.suite == "cx" || a.suite == "all") o.report.append(analysis::validate_claim_cx(a.n));
  if (a.suite == "quantum" || a.suite == "all") o.report.append(analysis::validate_quantum(a.n, c.seed));
  return o;
}

// reduce -----------------------------------------------------------------------

struct ReduceArgs {
  std::string which;
  std::uint32_t n = 8;
  std::string solver;
  std::uint64_t trials = 100'000;
  std::uint32_t t = 2;
  std::uint32_t i0 = 2;
  double epsilon = 0.01;
  std::uint64_t budget = 64;
  std::uint32_t l = 1;
  std::uint32_t k2 = 2;
  std::uint32_t universe = 6;
  bool trace = false;
};

std::unique_ptr<reductions::PsRectangleSolver> ps_solver(const std::string& name, std::uint32_t n) {
  if (name.rfind("tree:", 0) == 0) {
    auto tree = protocols::ProtocolTree::from_json(load_json(name.substr(5)));
    require(tree.problem() == protocols::Problem::kPs, "solver/problem mismatch: tree does not solve PS");
    require(tree.n() == n && tree.domain() == protocols::Domain::for_instances(n),
            "solver/problem mismatch: tree was built for a different n");
    return std::make_unique<reductions::TreePsSolver>(std::move(tree));
  }
  require(name == "perfect" || name == "adversarial" || name == "quantum",
          "solver/problem mismatch: " + name + " is not a PS solver");
  return reductions::make_ps_solver(name);
}

std::unique_ptr<reductions::PinSolver> pin_solver(const std::string& name) {
  require(name == "quantum" || name == "perfect" || name == "refuse",
          "solver/problem mismatch: " + name + " is not a Pin solver");
  return reductions::make_pin_solver(name);
}

json collect_traces(std::uint64_t trials, std::uint64_t seed, const std::function<json(Rng&)>& one) {
  json traces = json::array();
  const std::uint64_t count = std::min(trials, kMaxTraces);
  for (std::uint64_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    traces.push_back(one(rng));
  }
  return traces;
}

Outcome cmd_reduce(const ReduceArgs& a, const Common& c) {
  require(a.trials >= 1, "--trials must be positive");
  Outcome o;
  // Traced runs use their own seed stream so they never perturb the measurement.
  const std::uint64_t trace_seed = derive_seed(c.seed, 0x7472616365);
  if (a.which == "in2ii") {
    validate_size(a.n);
    const auto solver = pin_solver(a.solver.empty() ? "quantum" : a.solver);
    o.report.append(analysis::measure_in2ii(a.n, *solver, a.trials, c.seed));
    if (a.trace) {
      o.details["traces"] = collect_traces(a.trials, trace_seed, [&](Rng& rng) {
        const auto inst = sample(DistributionSpec::exactly(a.n, 2), rng);
        return reductions::reduce_in2ii(inst, *solver, rng, {false, true}).trace.to_json();
      });
    }
  } else if (a.which == "ii2iip") {
    validate_size(a.n);
    const auto solver = ps_solver(a.solver.empty() ? "perfect" : a.solver, a.n);
    o.report.append(analysis::measure_ii2iip(a.n, *solver, a.trials, c.seed));
    if (a.trace) {
      o.details["traces"] = collect_traces(a.trials, trace_seed, [&](Rng& rng) {
        const auto inst = sample(DistributionSpec::exactly(a.n, 2), rng);
        reductions::Ii2iipOptions options;
        options.trace = true;
        return reductions::reduce_ii2iip(inst, *solver, rng, options).trace.to_json();
      });
    }
  } else if (a.which == "iip-pad") {
    validate_size(a.n);
    require(a.solver.empty() || a.solver == "perfect", "solver/problem mismatch: iip-pad takes the perfect solver");
    o.report.append(analysis::measure_iip_padding(a.n, a.t, a.i0, a.trials, c.seed));
    if (a.trace) {
      const reductions::PerfectPiipSolver solver(a.t);
      const std::uint32_t m = a.n * a.n - a.i0;
      o.details["traces"] = collect_traces(a.trials, trace_seed, [&](Rng& rng) {
        auto [xp, yp] = sample_pair_with_overlap(m, a.n / 2 - a.i0, a.n - a.i0, 0, rng);
        return reductions::reduce_iip_padding(a.n, xp, yp, a.i0, a.t, solver, rng, true).trace.to_json();
      });
    }
  } else if (a.which == "derandomize") {
    validate_size(a.n);
    const auto solver = pin_solver(a.solver.empty() ? "quantum" : a.solver);
    const auto r = reductions::derandomize_in2ii(*solver, a.n, a.epsilon, a.budget, a.trials, c.seed);
    const std::string at = "@n=" + std::to_string(a.n) + ",solver=" + solver->name();
    o.report.claims.push_back(check("derandomize.found" + at, "a seed within " + std::to_string(a.budget) + " tries",
                                    r.found ? "seed " + std::to_string(r.seed) + " after " +
                                                  std::to_string(r.seeds_tried)
                                            : "none after " + std::to_string(r.seeds_tried),
                                    r.found, "monte carlo search"));
    if (r.found) {
      o.report.claims.push_back(check("derandomize.answer_rate" + at, ">= " + fmt(r.threshold), fmt(r.answer_rate),
                                      r.answer_rate >= r.threshold, "monte carlo"));
      o.report.claims.push_back(check("derandomize.error_rate" + at, "<= " + fmt(2 * a.epsilon), fmt(r.error_rate),
                                      r.error_rate <= 2 * a.epsilon, "monte carlo"));
    }
    o.details = {{"found", r.found},          {"seed", r.seed},           {"seeds_tried", r.seeds_tried},
                 {"answer_rate", r.answer_rate}, {"error_rate", r.error_rate}, {"threshold", r.threshold},
                 {"solver_rate", r.solver_rate}};
  } else if (a.which == "embed") {
    o.report.append(analysis::measure_embedding(a.l, a.universe, a.k2, a.trials, c.seed));
  } else {
    throw ContractViolation("unknown reduction: " + a.which);
  }
  return o;
}

// rectangles ---------------------------------------------------------------------

struct RectanglesArgs {
  std::string tree;
  std::vector<std::string> deltas{"1/4"};
  std::uint64_t public_string = 0;
  std::string razborov = "none";
};

Outcome cmd_rectangles(const RectanglesArgs& a, const Common&) {
  const auto tree = protocols::ProtocolTree::from_json(load_json(a.tree));
  const auto& domain = tree.domain();
  std::vector<Rational> deltas;
  for (const auto& d : a.deltas) deltas.push_back(parse_rational(d));
  std::sort(deltas.begin(), deltas.end());

  std::optional<protocols::RazborovDistribution> dist;
  if (a.razborov == "product") {
    dist = protocols::RazborovDistribution::product(domain.universe, domain.size_x, domain.size_y);
  } else if (a.razborov == "mixed") {
    require(domain.size_x == domain.size_y && domain.universe == 4 * domain.size_x - 1,
            "mixed distribution needs universe 4l - 1 and both sizes l");
    dist = protocols::RazborovDistribution::mixed(domain.size_x);
  }

  const auto partition = protocols::extract_rectangles(tree, a.public_string);
  Outcome o;
  std::vector<std::uint64_t> labeled(deltas.size(), 0);
  std::uint64_t covered = 0;
  json rects = json::array();
  for (std::size_t r = 0; r < partition.rectangles.size(); ++r) {
    const auto& rect = partition.rectangles[r];
    covered += rect.size();
    const auto stats = protocols::rectangle_stats(rect, domain);
    json labels = json::object();
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      const bool is = protocols::is_delta_labeled(rect, deltas[d], stats);
      labels[qsep::to_string(deltas[d])] = is;
      labeled[d] += is ? 1 : 0;
    }
    json entry = {{"transcript", partition.transcripts[r]},
                  {"alice_size", rect.alice.size()},
                  {"bob_size", rect.bob.size()},
                  {"stats", protocols::to_json(stats)},
                  {"delta_labeled", labels}};
    if (dist) {
      const auto ratio = protocols::razborov_ratio(rect, *dist);
      entry["razborov"] = {{"mass_x0", qsep::to_string(ratio.mass_x0)},
                           {"mass_x1", qsep::to_string(ratio.mass_x1)},
                           {"ratio", ratio.ratio ? json(qsep::to_string(*ratio.ratio)) : json(nullptr)}};
    }
    rects.push_back(std::move(entry));
  }
  const std::uint64_t all = domain.alice_count() * domain.bob_count();
  o.report.claims.push_back(info("rectangles.count", "leaves reached", std::to_string(partition.rectangles.size()),
                                 "exhaustive enumeration"));
  o.report.claims.push_back(check("rectangles.product_closure", "every transcript group is a product set", "yes", true,
                                  "exhaustive enumeration"));
  o.report.claims.push_back(check("rectangles.cover", std::to_string(all) + " input pairs", std::to_string(covered),
                                  covered == all, "exhaustive enumeration"));
  bool monotone = true;
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    if (d > 0 && labeled[d] > labeled[d - 1]) monotone = false;
    o.report.claims.push_back(info("rectangles.delta_labeled@delta=" + qsep::to_string(deltas[d]), "count",
                                   std::to_string(labeled[d]), "exact rational"));
  }
  o.report.claims.push_back(check("rectangles.delta_monotone", "label counts non-increasing in delta",
                                  monotone ? "yes" : "no", monotone, "exact rational"));
  o.details = {{"domain", {{"universe", domain.universe}, {"size_x", domain.size_x}, {"size_y", domain.size_y}}},
               {"rectangles", rects}};
  return o;
}

// experiment ----------------------------------------------------------------------

struct ExperimentArgs {
  std::string id;
  std::uint64_t trials = 100'000;
};

Outcome cmd_experiment(const ExperimentArgs& a, const Common& c) {
  return {analysis::run_experiment(a.id, {c.seed, a.trials}), json()};
}

// Output ------------------------------------------------------------------------

std::string render(const Outcome& o, const std::string& format) {
  if (format == "csv") return o.report.to_csv();
  json j = o.report.to_json();
  if (!o.details.is_null()) j["details"] = o.details;
  return j.dump(2) + "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulations and checks for one-way quantum vs classical set-intersection problems", "qsep"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Common common;
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Master seed (default: $QSEP_SEED)");
  app.add_option("--format", common.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output,-o", common.output, "Write the report here instead of stdout");
  app.add_flag("--timing", common.timing, "Record wall time in the report");

  QuantumArgs qa;
  auto* quantum = app.add_subcommand("quantum", "Run the one-way quantum protocol");
  quantum->add_option("--n", qa.n, "Problem size (power of two, >= 4)")->required();
  quantum->add_option("--mode", qa.mode)->check(CLI::IsMember({"exact", "sampled"}));
  quantum->add_option("--trials", qa.trials, "Sampled runs");
  quantum->add_option("--instances", qa.instances, "Exact instances to check")->check(CLI::PositiveNumber);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Run exact validator suites");
  validate->add_option("--suite", va.suite)->check(CLI::IsMember({"cx", "quantum", "all"}));
  validate->add_option("--n", va.n)->required();

  ReduceArgs ra;
  auto* reduce = app.add_subcommand("reduce", "Measure a reduction");
  reduce->add_option("--which", ra.which)
      ->required()
      ->check(CLI::IsMember({"in2ii", "ii2iip", "iip-pad", "derandomize", "embed"}));
  reduce->add_option("--n", ra.n);
  reduce->add_option("--solver", ra.solver, "quantum | perfect | refuse | adversarial | tree:<file>");
  reduce->add_option("--trials", ra.trials);
  reduce->add_option("--t", ra.t, "Elements the Piip solver must return");
  reduce->add_option("--i0", ra.i0, "Padding size");
  reduce->add_option("--epsilon", ra.epsilon);
  reduce->add_option("--budget", ra.budget, "Seeds to try when derandomizing");
  reduce->add_option("--l", ra.l, "Embedding: size of x' and y'");
  reduce->add_option("--k2", ra.k2, "Embedding: size of y");
  reduce->add_option("--universe", ra.universe, "Embedding: target ground set size");
  reduce->add_flag("--trace", ra.trace, "Attach per-run traces (JSON only)");

  RectanglesArgs rca;
  auto* rectangles = app.add_subcommand("rectangles", "Rectangle analysis of a protocol tree");
  rectangles->add_option("--tree", rca.tree, "Protocol tree JSON")->required();
  rectangles->add_option("--delta", rca.deltas, "Label thresholds")->delimiter(',');
  rectangles->add_option("--public", rca.public_string, "Public random string");
  rectangles->add_option("--razborov", rca.razborov)->check(CLI::IsMember({"none", "product", "mixed"}));

  ExperimentArgs ea;
  auto* experiment = app.add_subcommand("experiment", "Run a named experiment");
  experiment->add_option("--id", ea.id, "empty | all-exact | separation-demo")->required();
  experiment->add_option("--trials", ea.trials);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    common.seed = seed ? *seed : default_seed();
    if (ra.trace && common.format == "csv") throw ContractViolation("--trace needs --format json");
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    if (*quantum) o = cmd_quantum(qa, common);
    else if (*validate) o = cmd_validate(va, common);
    else if (*reduce) o = cmd_reduce(ra, common);
    else if (*rectangles) o = cmd_rectangles(rca, common);
    else o = cmd_experiment(ea, common);
    o.report.seed = common.seed;
    o.report.version = analysis::library_version();
    if (common.timing) {
      o.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    const std::string text = render(o, common.format);
    if (common.output.empty()) {
      out << text;
    } else {
      std::ofstream file(common.output, std::ios::binary);
      if (!file) throw ContractViolation("cannot write " + common.output);
      file << text;
    }
    err << "seed=" << common.seed << '\n';
    return o.report.all_pass() ? kSuccess : kClaimFailure;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const CostViolation& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const InvariantFailure& e) {
    err << "internal invariant failed: " << e.what() << '\n';
    return kInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace qsep::cli
