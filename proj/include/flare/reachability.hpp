#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "flare/marking_expr.hpp"
#include "flare/tpn.hpp"

namespace flare {

using StateIndex = std::uint32_t;

/// Edge label reserved for a unit time advance. Every other label is an
/// index into the graph's transition table.
inline constexpr std::int32_t kTickLabel = -1;
inline constexpr std::string_view kTickName = "\xcf\x84";  // τ

inline constexpr std::size_t kDefaultMaxStates = 1'000'000;

/// A reachable state in canonical form: non-zero (place, tokens) pairs sorted
/// by place, and (transition, elapsed) pairs for exactly the enabled
/// transitions, sorted by transition.
struct GraphState {
  std::vector<std::pair<int, int>> marking;
  std::vector<std::pair<int, int>> clocks;

  friend bool operator==(const GraphState&, const GraphState&) = default;
};

struct Edge {
  StateIndex source;
  std::int32_t label;
  StateIndex target;

  bool is_tick() const { return label == kTickLabel; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Explicit state graph. Immutable once constructed; out-edges are stored
/// contiguously per source state in insertion order.
class ReachabilityGraph {
 public:
  ReachabilityGraph() = default;

  // Generic constructor (used by the builders and by hand-written fixtures).
  // States must be pairwise distinct; edge endpoints and labels must exist.
  ReachabilityGraph(std::vector<std::string> place_names,
                    std::vector<std::string> transition_ids,
                    const std::vector<GraphState>& states, std::vector<Edge> edges,
                    StateIndex initial = 0);

  std::size_t state_count() const { return state_offsets_.empty() ? 0 : state_offsets_.size() - 1; }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t tick_edge_count() const { return tick_edges_; }
  std::size_t firing_edge_count() const { return edges_.size() - tick_edges_; }
  StateIndex initial() const { return initial_; }

  const std::vector<std::string>& place_names() const { return place_names_; }
  const std::vector<std::string>& transition_ids() const { return transition_ids_; }
  std::string_view label_name(std::int32_t label) const;

  GraphState state(StateIndex s) const;
  /// Same as state() but reuses the caller's buffers.
  void decode(StateIndex s, std::vector<std::pair<int, int>>& marking,
              std::vector<std::pair<int, int>>& clocks) const;
  int tokens(StateIndex s, int place) const;
  bool has_enabled(StateIndex s) const;

  std::span<const Edge> edges() const { return edges_; }
  std::span<const Edge> out_edges(StateIndex s) const {
    return std::span<const Edge>(edges_).subspan(edge_offsets_[s],
                                                 edge_offsets_[s + 1] - edge_offsets_[s]);
  }

 private:
  friend class GraphBuilder;
  friend ReachabilityGraph build_reachability_graph(const TimePetriNet& net,
                                                    std::size_t max_states);
  void finish_edges();

  std::vector<std::string> place_names_;
  std::vector<std::string> transition_ids_;
  // Encoded states: [n_marking, (place, tokens)*, n_clocks, (transition, clock)*]
  std::vector<std::int32_t> state_data_;
  std::vector<std::size_t> state_offsets_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> edge_offsets_;
  std::size_t tick_edges_ = 0;
  StateIndex initial_ = 0;
};

/// Builds the reachability graph under discrete-time strong semantics with
/// single-server firing:
///  - t fires from a state when enabled with eft(t) <= clock(t) <= lft(t);
///  - a unit tick advances every enabled clock and is allowed only when some
///    transition is enabled and none is at its lft;
///  - after a firing, t itself and every transition not enabled in the
///    intermediate marking restart at clock 0; the rest keep their clocks.
/// Clocks of transitions with unbounded lft saturate at eft. States are
/// numbered in breadth-first discovery order.
///
/// Throws StateSpaceOverflow when more than `max_states` states are reached.
ReachabilityGraph build_reachability_graph(const TimePetriNet& net,
                                           std::size_t max_states = kDefaultMaxStates);

/// Quotient of `graph` that merges states linked by tick edges (they always
/// share a marking) and keeps one copy of each distinct firing edge between
/// classes. The result has no tick edges; each class is represented by its
/// lowest-numbered member.
ReachabilityGraph abstract_time(const ReachabilityGraph& graph);

struct DeadlockPredicate {};

/// Marking predicate bound by place name; see MarkingExpr for the syntax.
struct MarkingPredicate {
  MarkingExpr expr;
};

using StatePredicate = std::variant<DeadlockPredicate, MarkingPredicate>;

// "deadlock" or "marking:<expr>".
StatePredicate parse_property(std::string_view text);

/// Indices of states satisfying the predicate, ascending.
std::vector<StateIndex> find_violation_states(const ReachabilityGraph& graph,
                                              const StatePredicate& predicate);
std::vector<StateIndex> find_violation_states(
    const ReachabilityGraph& graph,
    const std::function<bool(const ReachabilityGraph&, StateIndex)>& predicate);

void write_dot(std::ostream& os, const ReachabilityGraph& graph);

}  // namespace flare
