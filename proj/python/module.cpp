#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flare/deadlock_testbed.hpp"
#include "flare/diagnosis.hpp"
#include "flare/error.hpp"
#include "flare/hmm.hpp"
#include "flare/ranking.hpp"
#include "flare/reachability.hpp"
#include "flare/sim_testbed.hpp"

namespace py = pybind11;
using namespace flare;

namespace {

// JSON crosses the boundary as text; the Python side wraps it with json.loads.
Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(e.what());
  }
}

py::list ranking_rows(const SuspicionRanking& ranking) {
  py::list rows;
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    const RankEntry& e = ranking.entries[i];
    py::dict row;
    row["rank"] = i + 1;
    row["transition"] = e.transition;
    row["cf"] = e.cf;
    row["tc_mean"] = e.tc_mean;
    row["itc"] = e.itc;
    row["trace_count"] = e.trace_count;
    rows.append(row);
  }
  return rows;
}

py::dict analyze_net(const std::string& net_json, const std::string& property, std::size_t max_states,
                     bool time_abstraction) {
  const GeneratedCase gc = case_from_json(parse(net_json));
  ReachabilityGraph graph = build_reachability_graph(gc.net, max_states);
  if (time_abstraction) graph = abstract_time(graph);
  const std::vector<StateIndex> violations = find_violation_states(graph, parse_property(property));
  SuspicionRanking ranking;
  std::vector<ErrorTrace> traces;
  if (!violations.empty()) {
    traces = extract_error_traces(graph, violations);
    ranking = rank_transitions(traces);
  }
  py::dict out;
  out["states"] = graph.state_count();
  out["edges"] = graph.edge_count();
  out["violations"] = violations;
  py::list trace_list;
  for (const ErrorTrace& t : traces) trace_list.append(t.transitions);
  out["traces"] = trace_list;
  out["ranking"] = ranking_rows(ranking);
  if (!gc.faulty_transitions.empty() && !ranking.entries.empty()) {
    const ExamResult r = exam_score(ranking, gc.faulty_transitions, gc.net.transition_count());
    out["exam"] = r.exam_score;
    out["rank_first"] = r.rank_of_first_fault;
  }
  return out;
}

std::string generate_tpn_case(int processes, int resources, int faults, std::uint64_t seed) {
  return to_json(generate_case(random_spec(processes, resources, faults, seed))).dump();
}

std::string generate_component_system(int components, double avg_io, int faults, std::uint64_t seed, int cases) {
  const ComponentSystem sys =
      generate_system(components, avg_io, faults >= 0 ? faults : default_fault_count(components), seed);
  Json doc;
  doc["schema"] = 1;
  doc["seed"] = seed;
  doc["system"] = to_json(sys);
  if (cases > 0) doc["dataset"] = to_json(simulate(sys, cases, derive_seed(seed, {1})));
  return doc.dump();
}

py::list diagnose(const std::string& bundle_json, std::uint64_t seed, int max_iter) {
  const Json doc = parse(bundle_json);
  const ComponentSystem sys = system_from_json(doc.at("system"));
  const SimulatedDataset data = dataset_from_json(doc.at("dataset"));
  DiagnosisOptions options;
  options.seed = seed;
  options.search.max_iter = max_iter;
  const SystemDiagnosis diag = diagnose_system(sys, data, options);
  py::list rows;
  for (const RankedComponent& rc : rank_components(sys, diag.verdicts)) {
    py::dict row;
    row["component"] = rc.verdict.component;
    row["status"] = to_string(rc.verdict.status);
    row["matching"] = rc.verdict.mu;
    row["confidence"] = rc.verdict.rho;
    row["rank"] = rc.rank;
    rows.append(row);
  }
  return rows;
}

py::dict accuracy(const std::vector<int>& components, const std::vector<double>& avg_io, int cases, int repeats,
                  std::uint64_t seed) {
  AccuracyParams params;
  params.components = components;
  params.avg_io = avg_io;
  params.cases = cases;
  params.repeats = repeats;
  params.seed = seed;
  params.workers = 1;
  AccuracyReport report;
  {
    py::gil_scoped_release release;
    report = evaluate_accuracy(params);
  }
  py::list cells;
  for (const AccuracyCell& c : report.cells) {
    py::dict row;
    row["components"] = c.components;
    row["avg_io"] = c.avg_io;
    row["repeats"] = c.repeats;
    row["accuracy_mean"] = c.accuracy_mean;
    row["accuracy_std"] = c.accuracy_std;
    cells.append(row);
  }
  py::dict out;
  out["cells"] = cells;
  out["overall_mean"] = report.overall_mean;
  return out;
}

}  // namespace

PYBIND11_MODULE(_flare, m) {
  m.doc() = "Fault localization for time Petri nets and HMM component diagnosis";

  auto base = py::register_exception<Error>(m, "FlareError", PyExc_RuntimeError);
  py::register_exception<StateSpaceOverflow>(m, "StateSpaceOverflow", base.ptr());
  py::register_exception<ZeroProbabilitySequence>(m, "ZeroProbabilitySequence", base.ptr());
  py::register_exception<NotADistribution>(m, "NotADistribution", base.ptr());
  py::register_exception<BadObservationIndex>(m, "BadObservationIndex", base.ptr());

  m.def("analyze_net", &analyze_net, py::arg("net_json"), py::arg("property") = "deadlock",
        py::arg("max_states") = kDefaultMaxStates, py::arg("time_abstraction") = false,
        "Build the state graph of a net (or generated case) and rank its transitions.");
  m.def("generate_tpn_case", &generate_tpn_case, py::arg("processes"), py::arg("resources"), py::arg("faults"),
        py::arg("seed"));
  m.def("kl_divergence", [](const std::vector<double>& p, const std::vector<double>& q) {
    return kl_divergence(p, q);
  });

  py::class_<Hmm>(m, "Hmm")
      .def(py::init<std::vector<double>, Matrix, Matrix>(), py::arg("initial"), py::arg("transition"),
           py::arg("emission"))
      .def_property_readonly("n_states", &Hmm::n_states)
      .def_property_readonly("n_obs", &Hmm::n_obs)
      .def_property_readonly("initial", &Hmm::initial)
      .def_property_readonly("transition", &Hmm::transition)
      .def_property_readonly("emission", &Hmm::emission)
      .def("sequence_probability",
           [](const Hmm& h, const std::vector<int>& obs) { return sequence_probability(h, obs); })
      .def("sequence_log_probability",
           [](const Hmm& h, const std::vector<int>& obs) { return sequence_log_probability(h, obs); })
      .def("most_likely_states",
           [](const Hmm& h, const std::vector<int>& obs) { return most_likely_states(h, obs); });

  m.def("build_initial_matrix", &build_initial_matrix, py::arg("omega") = kDefaultOmega);
  m.def(
      "build_transition_matrix",
      [](double alpha, double beta, double gamma, double delta, double omega) {
        return build_transition_matrix(Rates{alpha, beta, gamma, delta}, omega);
      },
      py::arg("alpha"), py::arg("beta"), py::arg("gamma"), py::arg("delta"), py::arg("omega") = kDefaultOmega);

  m.def("generate_component_system", &generate_component_system, py::arg("components"), py::arg("avg_io"),
        py::arg("faults") = -1, py::arg("seed") = 0, py::arg("cases") = 100);
  m.def("diagnose", &diagnose, py::arg("bundle_json"), py::arg("seed") = 0,
        py::arg("max_iter") = SearchOptions{}.max_iter);
  m.def("accuracy", &accuracy, py::arg("components"), py::arg("avg_io"), py::arg("cases") = 100,
        py::arg("repeats") = 5, py::arg("seed") = 3);
}
