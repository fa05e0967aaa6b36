#include "flare/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flare/error.hpp"

namespace flare {

std::size_t ErrorTrace::size() const {
  std::size_t n = 0;
  for (const auto& [id, c] : transitions) n += c;
  return n;
}

std::size_t ErrorTrace::count(const std::string& id) const {
  auto it = transitions.find(id);
  return it == transitions.end() ? 0 : it->second;
}

std::vector<ErrorTrace> extract_error_traces(const ReachabilityGraph& graph,
                                             std::span<const StateIndex> violations) {
  const std::size_t n = graph.state_count();
  for (StateIndex v : violations) {
    if (v >= n) throw InvalidArgument("violation state " + std::to_string(v) + " not in graph");
  }
  std::vector<ErrorTrace> traces;
  if (violations.empty()) return traces;

  std::vector<char> from_initial(n, 0);
  std::vector<StateIndex> stack{graph.initial()};
  from_initial[graph.initial()] = 1;
  while (!stack.empty()) {
    StateIndex s = stack.back();
    stack.pop_back();
    for (const Edge& e : graph.out_edges(s)) {
      if (!from_initial[e.target]) {
        from_initial[e.target] = 1;
        stack.push_back(e.target);
      }
    }
  }

  // Predecessor lists in CSR form.
  std::vector<std::size_t> in_offsets(n + 1, 0);
  for (const Edge& e : graph.edges()) ++in_offsets[e.target + 1];
  std::partial_sum(in_offsets.begin(), in_offsets.end(), in_offsets.begin());
  std::vector<StateIndex> preds(graph.edge_count());
  {
    std::vector<std::size_t> fill(in_offsets.begin(), in_offsets.end() - 1);
    for (const Edge& e : graph.edges()) preds[fill[e.target]++] = e.source;
  }

  const std::size_t n_labels = graph.transition_ids().size();
  std::vector<std::uint32_t> stamp(n, 0);
  std::vector<std::size_t> counts(n_labels);
  std::uint32_t generation = 0;
  for (StateIndex v : violations) {
    ++generation;
    std::fill(counts.begin(), counts.end(), 0);
    stamp[v] = generation;
    stack.assign(1, v);
    while (!stack.empty()) {
      StateIndex s = stack.back();
      stack.pop_back();
      for (std::size_t k = in_offsets[s]; k < in_offsets[s + 1]; ++k) {
        StateIndex p = preds[k];
        if (stamp[p] == generation) continue;
        stamp[p] = generation;
        stack.push_back(p);
        if (!from_initial[p]) continue;
        for (const Edge& e : graph.out_edges(p)) {
          if (!e.is_tick()) ++counts[static_cast<std::size_t>(e.label)];
        }
      }
    }
    ErrorTrace trace;
    trace.violation_state = v;
    for (std::size_t l = 0; l < n_labels; ++l) {
      if (counts[l] > 0) trace.transitions[graph.transition_ids()[l]] += counts[l];
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

double transition_contribution(const ErrorTrace& trace, const std::string& id) {
  const std::size_t total = trace.size();
  if (total == 0) {
    throw EmptyTrace("error trace of state " + std::to_string(trace.violation_state) +
                     " is empty");
  }
  return static_cast<double>(trace.count(id)) / static_cast<double>(total);
}

double inverse_trace_contribution(std::span<const ErrorTrace> traces, const std::string& id) {
  const auto containing = static_cast<std::size_t>(std::count_if(
      traces.begin(), traces.end(), [&](const ErrorTrace& t) { return t.count(id) > 0; }));
  if (containing == 0) throw UnknownTransition("transition '" + id + "' is in no error trace");
  return std::log(static_cast<double>(traces.size()) / static_cast<double>(containing)) + 1.0;
}

SuspicionRanking rank_transitions(std::span<const ErrorTrace> traces) {
  if (traces.empty()) throw InvalidArgument("rank_transitions needs at least one error trace");
  std::set<std::string> ids;
  for (const ErrorTrace& t : traces) {
    if (t.size() == 0) {
      throw EmptyTrace("error trace of state " + std::to_string(t.violation_state) + " is empty");
    }
    for (const auto& [id, c] : t.transitions) ids.insert(id);
  }

  SuspicionRanking ranking;
  ranking.trace_count = traces.size();
  const double n_traces = static_cast<double>(traces.size());
  for (const std::string& id : ids) {
    RankEntry e;
    e.transition = id;
    double tc_sum = 0.0;
    for (const ErrorTrace& t : traces) {
      const std::size_t c = t.count(id);
      if (c > 0) ++e.trace_count;
      tc_sum += static_cast<double>(c) / static_cast<double>(t.size());
    }
    e.tc_mean = tc_sum / n_traces;
    e.itc = std::log(n_traces / static_cast<double>(e.trace_count)) + 1.0;
    e.cf = e.tc_mean * e.itc;
    ranking.entries.push_back(std::move(e));
  }
  // ids arrive sorted, so a stable sort on score keeps the id tie-break.
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const RankEntry& a, const RankEntry& b) { return a.cf > b.cf; });
  return ranking;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw DimensionMismatch("distributions have different support sizes (" +
                            std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
  }
  if (p.empty()) throw DimensionMismatch("distributions have empty support");
  auto check = [](std::span<const double> d, const char* name) {
    double sum = 0.0;
    for (double x : d) {
      if (!std::isfinite(x) || x < 0.0) {
        throw NotADistribution(std::string(name) + " has a negative or non-finite entry");
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw NotADistribution(std::string(name) + " sums to " + std::to_string(sum));
    }
  };
  check(p, "P");
  check(q, "Q");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave a tiny negative value for P ~= Q.
  return std::max(d, 0.0);
}

ExamResult exam_score(const SuspicionRanking& ranking, const std::set<std::string>& faulty,
                      std::size_t total_model_transitions) {
  if (ranking.entries.empty()) throw InvalidArgument("exam_score needs a non-empty ranking");
  if (faulty.empty()) throw InvalidArgument("exam_score needs at least one faulty transition");
  ExamResult r;
  r.total_ranked = ranking.entries.size();
  r.total_model_transitions = total_model_transitions;
  const auto& entries = ranking.entries;
  auto it = std::find_if(entries.begin(), entries.end(),
                         [&](const RankEntry& e) { return faulty.count(e.transition) > 0; });
  const double total = static_cast<double>(r.total_ranked);
  if (it == entries.end()) {
    r.not_found = true;
    r.rank_of_first_fault = r.best_rank = r.worst_rank = r.total_ranked;
    r.exam_score = r.best_exam = r.worst_exam = 1.0;
    return r;
  }
  r.rank_of_first_fault = static_cast<std::size_t>(it - entries.begin());
  r.exam_score = static_cast<double>(r.rank_of_first_fault + 1) / total;
  const double score = it->cf;
  for (const RankEntry& e : entries) {
    if (e.cf > score) {
      ++r.best_rank;
      ++r.worst_rank;
    } else if (e.cf == score && faulty.count(e.transition) == 0) {
      ++r.worst_rank;
    }
  }
  r.best_exam = static_cast<double>(r.best_rank + 1) / total;
  r.worst_exam = static_cast<double>(r.worst_rank + 1) / total;
  return r;
}

}  // namespace flare
