#include "flare/deadlock_testbed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>

#include "flare/error.hpp"
#include "flare/parallel.hpp"
#include "flare/reachability.hpp"
#include "flare/rng.hpp"

namespace flare {

namespace {

std::string proc_place(int i, int k) { return "p" + std::to_string(i) + "_" + std::to_string(k); }
std::string hold_place(int i, int k) { return "h" + std::to_string(i) + "_" + std::to_string(k); }
std::string start_place(int i) { return "s" + std::to_string(i); }
std::string start_id(int i) { return "start_" + std::to_string(i); }
std::string res_place(int j) { return "r" + std::to_string(j); }
std::string acq_id(int i, int j) { return "acq_" + std::to_string(i) + "_" + std::to_string(j); }
std::string task_id(int i, int j) { return "task_" + std::to_string(i) + "_" + std::to_string(j); }

void validate(const SystemSpec& s) {
  if (s.processes < 2) throw InfeasibleSpec("need at least 2 processes");
  if (s.resources < 1) throw InfeasibleSpec("need at least 1 resource");
  if (s.access.size() != static_cast<std::size_t>(s.processes) ||
      s.task_intervals.size() != static_cast<std::size_t>(s.processes)) {
    throw InfeasibleSpec("access matrix / intervals must have one row per process");
  }
  int segments = 0;
  for (int i = 0; i < s.processes; ++i) {
    if (s.access[i].size() != static_cast<std::size_t>(s.resources) ||
        s.task_intervals[i].size() != static_cast<std::size_t>(s.resources)) {
      throw InfeasibleSpec("access matrix / intervals must have one column per resource");
    }
    const int row = static_cast<int>(std::count(s.access[i].begin(), s.access[i].end(), true));
    if (row == 0) throw InfeasibleSpec("process " + std::to_string(i) + " accesses no resource");
    segments += row;
    for (int j = 0; j < s.resources; ++j) {
      const Interval& iv = s.task_intervals[i][j];
      if (s.access[i][j] && (iv.eft < 0 || iv.lft < iv.eft)) {
        throw InfeasibleSpec("invalid task interval for process " + std::to_string(i));
      }
    }
  }
  if (s.fault_count < 0 || s.fault_count > segments) {
    throw InfeasibleSpec("fault_count " + std::to_string(s.fault_count) + " exceeds the " +
                         std::to_string(segments) + " acquire tasks");
  }
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

// Sequential encoding only: a process that touches no leaked resource never
// blocks for good (a waiting process holds nothing, every other holder
// finishes its task and releases), so the net has no deadlock.
bool surely_deadlock_free(const GeneratedCase& c) {
  if (c.spec.encoding != Encoding::sequential) return false;
  std::set<int> leaked;
  for (const std::string& id : c.faulty_transitions) {
    leaked.insert(std::stoi(id.substr(id.rfind('_') + 1)));
  }
  for (int i = 0; i < c.spec.processes; ++i) {
    bool touches = false;
    for (int j : leaked) touches = touches || c.spec.access[i][j];
    if (!touches) return true;
  }
  return false;
}

}  // namespace

SystemSpec random_spec(int processes, int resources, int fault_count, std::uint64_t seed,
                       const GenerationOptions& options) {
  if (processes < 1 || resources < 1) throw InfeasibleSpec("processes and resources must be positive");
  Rng rng(derive_seed(seed, {0x5eed}));
  SystemSpec s;
  s.processes = processes;
  s.resources = resources;
  s.fault_count = fault_count;
  s.seed = seed;
  s.encoding = options.encoding;
  const double density =
      options.min_density + (options.max_density - options.min_density) * uniform01(rng);
  s.access.assign(processes, std::vector<bool>(resources, false));
  s.task_intervals.assign(processes, std::vector<Interval>(resources));
  for (int i = 0; i < processes; ++i) {
    for (int j = 0; j < resources; ++j) s.access[i][j] = uniform01(rng) < density;
    if (std::none_of(s.access[i].begin(), s.access[i].end(), [](bool b) { return b; })) {
      s.access[i][uniform_int(rng, 0, resources - 1)] = true;
    }
    for (int j = 0; j < resources; ++j) {
      const std::int64_t eft = uniform_int(rng, options.interval_range.eft, options.interval_range.lft);
      const std::int64_t width =
          uniform_int(rng, 0, std::min(options.max_width, options.interval_range.lft - eft));
      s.task_intervals[i][j] = {eft, eft + width};
    }
  }
  return s;
}

GeneratedCase generate_case(const SystemSpec& spec) {
  validate(spec);
  Rng rng(derive_seed(spec.seed, {0xca5e}));

  std::vector<std::vector<int>> order(spec.processes);
  std::vector<std::pair<int, int>> segments;  // (process, resource)
  for (int i = 0; i < spec.processes; ++i) {
    for (int j = 0; j < spec.resources; ++j) {
      if (spec.access[i][j]) order[i].push_back(j);
    }
    std::shuffle(order[i].begin(), order[i].end(), rng);
    for (int j : order[i]) segments.emplace_back(i, j);
  }
  std::shuffle(segments.begin(), segments.end(), rng);
  std::set<std::pair<int, int>> faulty(segments.begin(), segments.begin() + spec.fault_count);

  std::vector<std::string> places;
  std::vector<Transition> transitions;
  std::map<std::string, int> marking;
  for (int j = 0; j < spec.resources; ++j) {
    places.push_back(res_place(j));
    marking[res_place(j)] = 1;
  }
  GeneratedCase out;
  for (int i = 0; i < spec.processes; ++i) {
    const int k_max = static_cast<int>(order[i].size());
    const bool hold = spec.encoding == Encoding::hold_and_wait && k_max > 1;
    for (int k = 0; k < k_max; ++k) {
      places.push_back(proc_place(i, k));
      places.push_back(hold_place(i, k));
    }
    if (hold) {
      places.push_back(start_place(i));
      marking[start_place(i)] = 1;
      Transition start;
      start.id = start_id(i);
      start.eft = 0;
      start.lft = 0;
      start.input_arcs = {{start_place(i), 1}, {res_place(order[i][0]), 1}};
      start.output_arcs = {{hold_place(i, 0), 1}};
      transitions.push_back(std::move(start));
    } else {
      marking[proc_place(i, 0)] = 1;
    }
    for (int k = 0; k < k_max; ++k) {
      const int j = order[i][k];
      const bool is_faulty = faulty.count({i, j}) > 0;
      Transition acq;
      acq.id = acq_id(i, j);
      acq.eft = 0;
      acq.lft = 0;
      acq.input_arcs = {{proc_place(i, k), 1}, {res_place(j), 1}};
      acq.output_arcs = {{hold_place(i, k), 1}};
      Transition task;
      task.id = task_id(i, j);
      task.eft = spec.task_intervals[i][j].eft;
      task.lft = spec.task_intervals[i][j].lft;
      task.input_arcs = {{hold_place(i, k), 1}};
      task.output_arcs = {{proc_place(i, (k + 1) % k_max), 1}};
      Transition& releasing = hold ? acq : task;
      if (is_faulty) {
        out.faulty_transitions.insert(releasing.id);
      } else {
        const int released = hold ? order[i][(k + k_max - 1) % k_max] : j;
        releasing.output_arcs[res_place(released)] = 1;
      }
      transitions.push_back(std::move(acq));
      transitions.push_back(std::move(task));
    }
  }
  out.spec = spec;
  out.net = TimePetriNet(std::move(places), std::move(transitions), marking);
  return out;
}

Json to_json(const SystemSpec& s) {
  Json doc;
  doc["processes"] = s.processes;
  doc["resources"] = s.resources;
  doc["fault_count"] = s.fault_count;
  doc["seed"] = s.seed;
  doc["encoding"] = s.encoding == Encoding::sequential ? "sequential" : "hold_and_wait";
  Json access = Json::array();
  Json intervals = Json::array();
  for (int i = 0; i < s.processes; ++i) {
    Json row = Json::array();
    Json irow = Json::array();
    for (int j = 0; j < s.resources; ++j) {
      row.push_back(s.access[i][j] ? 1 : 0);
      irow.push_back(Json::array({s.task_intervals[i][j].eft, s.task_intervals[i][j].lft}));
    }
    access.push_back(std::move(row));
    intervals.push_back(std::move(irow));
  }
  doc["access"] = std::move(access);
  doc["task_intervals"] = std::move(intervals);
  return doc;
}

SystemSpec spec_from_json(const Json& doc) {
  try {
    SystemSpec s;
    s.processes = doc.at("processes").get<int>();
    s.resources = doc.at("resources").get<int>();
    s.fault_count = doc.at("fault_count").get<int>();
    s.seed = doc.at("seed").get<std::uint64_t>();
    const std::string encoding = doc.value("encoding", std::string("sequential"));
    if (encoding == "sequential") {
      s.encoding = Encoding::sequential;
    } else if (encoding != "hold_and_wait") {
      throw InvalidArgument("unknown encoding '" + encoding + "'");
    }
    for (const Json& row : doc.at("access")) {
      std::vector<bool> r;
      for (const Json& v : row) r.push_back(v.get<int>() != 0);
      s.access.push_back(std::move(r));
    }
    for (const Json& row : doc.at("task_intervals")) {
      std::vector<Interval> r;
      for (const Json& v : row) r.push_back({v.at(0).get<std::int64_t>(), v.at(1).get<std::int64_t>()});
      s.task_intervals.push_back(std::move(r));
    }
    return s;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed system spec: ") + e.what());
  }
}

Json to_json(const GeneratedCase& c) {
  Json doc;
  doc["spec"] = to_json(c.spec);
  doc["net"] = to_json(c.net);
  doc["faulty_transitions"] = c.faulty_transitions;
  return doc;
}

GeneratedCase case_from_json(const Json& doc) {
  GeneratedCase c;
  if (doc.contains("spec")) c.spec = spec_from_json(doc.at("spec"));
  c.net = net_from_json(doc.contains("net") ? doc.at("net") : doc);
  if (doc.contains("faulty_transitions")) {
    c.faulty_transitions = doc.at("faulty_transitions").get<std::set<std::string>>();
  }
  return c;
}

CaseRecord evaluate_case(const GeneratedCase& c, std::size_t max_states, bool abstract) {
  CaseRecord rec;
  rec.faults = c.spec.fault_count;
  rec.processes = c.spec.processes;
  rec.resources = c.spec.resources;
  rec.seed = c.spec.seed;
  rec.model_transitions = c.net.transition_count();
  const auto start = std::chrono::steady_clock::now();
  ReachabilityGraph graph = build_reachability_graph(c.net, max_states);
  rec.states = graph.state_count();
  rec.edges = graph.edge_count();
  if (abstract) graph = abstract_time(graph);
  const std::vector<StateIndex> violations = find_violation_states(graph, DeadlockPredicate{});
  rec.violations = violations.size();
  if (!violations.empty()) {
    const std::vector<ErrorTrace> traces = extract_error_traces(graph, violations);
    const SuspicionRanking ranking = rank_transitions(traces);
    rec.exam = exam_score(ranking, c.faulty_transitions, rec.model_transitions);
    rec.ok = true;
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

CampaignReport run_campaign(const CampaignParams& params,
                            const std::function<void(const CaseRecord&)>& on_case) {
  if (params.processes.lo > params.processes.hi || params.resources.lo > params.resources.hi ||
      params.faults.lo > params.faults.hi || params.cases_per_fault < 1) {
    throw InvalidArgument("campaign ranges must be non-empty");
  }
  if (params.faults.lo < 1) throw InvalidArgument("campaign fault counts must be >= 1");
  CampaignReport report;
  report.params = params;
  const int n_faults = params.faults.hi - params.faults.lo + 1;
  const std::size_t total = static_cast<std::size_t>(n_faults) * params.cases_per_fault;
  report.cases.resize(total);
  std::mutex sink;

  parallel_for(total, params.workers, [&](std::size_t idx) {
    const int faults = params.faults.lo + static_cast<int>(idx / params.cases_per_fault);
    const std::size_t k = idx % params.cases_per_fault;
    CaseRecord rec;
    int no_deadlock = 0;
    int overflow = 0;
    int attempt = 0;
    for (; attempt < params.max_attempts; ++attempt) {
      const std::uint64_t seed =
          derive_seed(params.seed, {static_cast<std::uint64_t>(faults), k, static_cast<std::uint64_t>(attempt)});
      Rng draw(seed);
      const int p = static_cast<int>(uniform_int(draw, params.processes.lo, params.processes.hi));
      const int r = static_cast<int>(uniform_int(draw, params.resources.lo, params.resources.hi));
      GeneratedCase c;
      try {
        c = generate_case(random_spec(p, r, faults, seed, params.generation));
      } catch (const InfeasibleSpec&) {
        continue;
      }
      if (surely_deadlock_free(c)) {
        ++no_deadlock;
        continue;
      }
      try {
        rec = evaluate_case(c, params.max_states, params.abstract_time);
      } catch (const StateSpaceOverflow&) {
        ++overflow;
        continue;
      }
      if (rec.ok) break;
      ++no_deadlock;
    }
    rec.case_id = idx;
    rec.faults = faults;
    rec.attempts = std::min(attempt + 1, params.max_attempts);
    rec.no_deadlock = no_deadlock;
    rec.overflow = overflow;
    std::lock_guard lock(sink);
    report.cases[idx] = rec;
    if (on_case) on_case(rec);
  });

  report.summary = summarize(report.cases);
  return report;
}

std::vector<FaultSummary> summarize(const std::vector<CaseRecord>& cases) {
  std::map<int, std::vector<const CaseRecord*>> by_fault;
  for (const CaseRecord& c : cases) by_fault[c.faults].push_back(&c);
  std::vector<FaultSummary> out;
  for (const auto& [faults, recs] : by_fault) {
    FaultSummary s;
    s.faults = faults;
    std::vector<double> states, edges, secs, be, br, we, wr, ex, rk, ae, ar;
    for (const CaseRecord* c : recs) {
      s.rejected_no_deadlock += c->no_deadlock;
      s.rejected_overflow += c->overflow;
      if (!c->ok) {
        ++s.failed;
        continue;
      }
      ++s.tests;
      states.push_back(static_cast<double>(c->states));
      edges.push_back(static_cast<double>(c->edges));
      secs.push_back(c->seconds);
      be.push_back(c->exam.best_exam);
      br.push_back(static_cast<double>(c->exam.best_rank));
      we.push_back(c->exam.worst_exam);
      wr.push_back(static_cast<double>(c->exam.worst_rank));
      ex.push_back(c->exam.exam_score);
      rk.push_back(static_cast<double>(c->exam.rank_of_first_fault));
    }
    s.avg_states = mean(states);
    s.avg_edges = mean(edges);
    s.avg_seconds = mean(secs);
    s.best_exam = mean(be);
    s.best_exam_var = variance(be);
    s.best_rank = mean(br);
    s.best_rank_var = variance(br);
    s.worst_exam = mean(we);
    s.worst_exam_var = variance(we);
    s.worst_rank = mean(wr);
    s.worst_rank_var = variance(wr);
    s.exam = mean(ex);
    s.exam_var = variance(ex);
    s.rank = mean(rk);
    s.rank_var = variance(rk);
    s.avg_exam = (s.best_exam + s.worst_exam) / 2.0;
    s.avg_rank = (s.best_rank + s.worst_rank) / 2.0;
    out.push_back(s);
  }
  return out;
}

}  // namespace flare
