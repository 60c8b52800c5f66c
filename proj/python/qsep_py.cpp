#include "qsep/analysis.hpp"
#include "qsep/cli.hpp"
#include "qsep/errors.hpp"
#include "qsep/problems.hpp"
#include "qsep/quantum.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using nlohmann::json;

namespace {

// Structured values cross the boundary as JSON text; the python side parses it.
std::vector<std::string> rationals(const std::vector<qsep::Rational>& values) {
  std::vector<std::string> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(qsep::to_string(v));
  return out;
}

std::string quantum_exact(const std::string& instance_json) {
  const auto inst = qsep::pin_instance_from_json(json::parse(instance_json));
  const auto dist = qsep::quantum::run_exact(inst);
  json j;
  j["block_probabilities"] = rationals(dist.block_probabilities());
  j["answer_probability"] = qsep::to_string(dist.answer_probability());
  j["support_size"] = dist.support().size();
  j["readout_uniform"] = dist.conditional_readout_uniform(inst);
  return j.dump();
}

std::string report_json(const std::vector<qsep::analysis::ClaimReport>& claims, std::uint64_t seed) {
  qsep::analysis::Report report;
  report.seed = seed;
  report.version = qsep::analysis::library_version();
  report.append(claims);
  return report.to_json().dump();
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"qsep"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = qsep::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "qsep native core";
  m.attr("__version__") = qsep::analysis::library_version();

  py::register_exception<qsep::ContractViolation>(m, "ContractViolation", PyExc_ValueError);

  m.def("intersection_pmf", [](std::uint32_t n) { return rationals(qsep::intersection_pmf(n)); }, py::arg("n"),
        "Exact law of |x & y| under the uniform product distribution, as 'p/q' strings.");
  m.def("sample_pin", [](std::uint32_t n, std::uint64_t seed) { return qsep::to_json(qsep::sample_pin(n, seed)).dump(); },
        py::arg("n"), py::arg("seed"));
  m.def("sample_instance",
        [](std::uint32_t n, std::uint64_t seed) {
          return qsep::to_json(qsep::sample(qsep::DistributionSpec::uniform(n), seed)).dump();
        },
        py::arg("n"), py::arg("seed"));
  m.def("quantum_exact", &quantum_exact, py::arg("instance"));
  m.def("closed_form_answer_probability",
        [](std::uint32_t n) { return qsep::to_string(qsep::quantum::closed_form_answer_probability(n)); }, py::arg("n"));
  m.def("qubit_cost", [](std::uint32_t n) { return qsep::quantum::qubit_cost(n); }, py::arg("n"));
  m.def("validate_quantum",
        [](std::uint32_t n, std::uint64_t seed, std::uint32_t instances) {
          return report_json(qsep::analysis::validate_quantum(n, seed, instances), seed);
        },
        py::arg("n"), py::arg("seed"), py::arg("instances") = 1);
  m.def("validate_claim_cx", [](std::uint32_t n) { return report_json(qsep::analysis::validate_claim_cx(n), 0); },
        py::arg("n"));
  m.def("run_experiment",
        [](const std::string& id, std::uint64_t seed, std::uint64_t trials) {
          std::string text;
          {
            py::gil_scoped_release release;
            text = qsep::analysis::run_experiment(id, {seed, trials}).to_json().dump();
          }
          return text;
        },
        py::arg("id"), py::arg("seed"), py::arg("trials") = 100'000);
  m.def("experiment_ids", &qsep::analysis::experiment_ids);
  m.def("default_seed", &qsep::cli::default_seed);
  m.def("run_cli", &run_cli, py::arg("args"), "Runs the command line front end; returns (exit code, stdout, stderr).");
}
