#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "flare/reachability.hpp"

namespace flare {

/// Multiset of transition labels collected for one violation state.
struct ErrorTrace {
  StateIndex violation_state = 0;
  std::map<std::string, std::size_t> transitions;  // id -> occurrences (>= 1)

  std::size_t size() const;
  std::size_t count(const std::string& id) const;
};

/// For every violation state v, collects the outgoing firing-edge labels of
/// every state that is reachable from the initial state and from which v is
/// reachable (v itself excluded). A label counts once per distinct edge.
/// Tick edges take part in reachability but are never collected.
std::vector<ErrorTrace> extract_error_traces(const ReachabilityGraph& graph,
                                             std::span<const StateIndex> violations);

// Relative frequency of `id` in the trace. Throws EmptyTrace on an empty trace.
double transition_contribution(const ErrorTrace& trace, const std::string& id);

// ln(|traces| / n_t) + 1, n_t = number of traces containing `id`.
// Throws UnknownTransition when n_t = 0.
double inverse_trace_contribution(std::span<const ErrorTrace> traces, const std::string& id);

struct RankEntry {
  std::string transition;
  double cf = 0.0;
  double tc_mean = 0.0;
  double itc = 0.0;
  std::size_t trace_count = 0;  // traces containing the transition
};

/// Transitions ordered by fault contribution C_F = mean(TC) * ITC, highest
/// first; equal scores are ordered by transition id (byte-wise ascending).
struct SuspicionRanking {
  std::vector<RankEntry> entries;
  std::size_t trace_count = 0;
};

SuspicionRanking rank_transitions(std::span<const ErrorTrace> traces);

/// D_KL(P || Q) in nats. Terms with P(i) = 0 contribute 0; a term with
/// P(i) > 0 and Q(i) = 0 makes the result +infinity.
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct ExamResult {
  double exam_score = 1.0;           // (rank_of_first_fault + 1) / total_ranked
  std::size_t rank_of_first_fault = 0;  // 0-based, with the id tie-break
  std::size_t total_ranked = 0;
  bool not_found = false;
  // Optimistic/pessimistic positions when the first fault shares its score
  // with other transitions.
  std::size_t best_rank = 0;
  std::size_t worst_rank = 0;
  double best_exam = 1.0;
  double worst_exam = 1.0;
  std::size_t total_model_transitions = 0;  // metadata; 0 when unknown
};

ExamResult exam_score(const SuspicionRanking& ranking, const std::set<std::string>& faulty,
                      std::size_t total_model_transitions = 0);

}  // namespace flare
