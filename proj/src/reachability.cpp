#include "flare/reachability.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include "flare/error.hpp"
#include "flare/rng.hpp"

namespace flare {

// Incremental construction with value-based state deduplication. A candidate
// state is appended to the arena first; if an equal state already exists the
// candidate is dropped again.
class GraphBuilder {
 public:
  GraphBuilder(ReachabilityGraph& graph, std::size_t max_states)
      : g_(graph), max_states_(max_states), slots_(1024, kEmpty), hashes_(1024, 0) {
    g_.state_offsets_.assign(1, 0);
  }

  std::vector<std::int32_t>& scratch() { return g_.state_data_; }

  // Interns the state appended to the arena since the last call.
  std::pair<StateIndex, bool> intern() {
    const auto candidate = static_cast<StateIndex>(g_.state_offsets_.size() - 1);
    g_.state_offsets_.push_back(g_.state_data_.size());
    const std::uint64_t h = hash(candidate);
    std::size_t mask = slots_.size() - 1;
    for (std::size_t i = h & mask;; i = (i + 1) & mask) {
      if (slots_[i] == kEmpty) break;
      if (hashes_[i] == h && equal(slots_[i], candidate)) {
        g_.state_offsets_.pop_back();
        g_.state_data_.resize(g_.state_offsets_.back());
        return {slots_[i], false};
      }
    }
    if (candidate >= max_states_) {
      throw StateSpaceOverflow("state space exceeds max_states = " +
                               std::to_string(max_states_));
    }
    if (2 * (used_ + 1) > slots_.size()) grow();
    insert(candidate, h);
    return {candidate, true};
  }

  void add_edge(StateIndex src, std::int32_t label, StateIndex dst) {
    g_.edges_.push_back({src, label, dst});
  }

  std::size_t size() const { return g_.state_offsets_.size() - 1; }

 private:
  static constexpr StateIndex kEmpty = static_cast<StateIndex>(-1);

  std::span<const std::int32_t> slice(StateIndex s) const {
    return std::span<const std::int32_t>(g_.state_data_)
        .subspan(g_.state_offsets_[s], g_.state_offsets_[s + 1] - g_.state_offsets_[s]);
  }

  std::uint64_t hash(StateIndex s) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int32_t v : slice(s)) h = (h ^ static_cast<std::uint32_t>(v)) * 0x100000001b3ULL;
    return mix64(h);
  }

  bool equal(StateIndex x, StateIndex y) const {
    auto a = slice(x);
    auto c = slice(y);
    return std::equal(a.begin(), a.end(), c.begin(), c.end());
  }

  void insert(StateIndex s, std::uint64_t h) {
    const std::size_t mask = slots_.size() - 1;
    std::size_t i = h & mask;
    while (slots_[i] != kEmpty) i = (i + 1) & mask;
    slots_[i] = s;
    hashes_[i] = h;
    ++used_;
  }

  void grow() {
    std::vector<StateIndex> old_slots(slots_.size() * 2, kEmpty);
    std::vector<std::uint64_t> old_hashes(hashes_.size() * 2, 0);
    old_slots.swap(slots_);
    old_hashes.swap(hashes_);
    used_ = 0;
    for (std::size_t i = 0; i < old_slots.size(); ++i) {
      if (old_slots[i] != kEmpty) insert(old_slots[i], old_hashes[i]);
    }
  }

  ReachabilityGraph& g_;
  std::size_t max_states_;
  std::vector<StateIndex> slots_;
  std::vector<std::uint64_t> hashes_;
  std::size_t used_ = 0;
};

namespace {

void encode(std::vector<std::int32_t>& out, const GraphState& s) {
  out.push_back(static_cast<std::int32_t>(s.marking.size()));
  for (auto [p, n] : s.marking) {
    out.push_back(p);
    out.push_back(n);
  }
  out.push_back(static_cast<std::int32_t>(s.clocks.size()));
  for (auto [t, c] : s.clocks) {
    out.push_back(t);
    out.push_back(c);
  }
}

void encode_dense(std::vector<std::int32_t>& out, const std::vector<int>& marking,
                  const std::vector<int>& clocks) {
  auto count_at = out.size();
  out.push_back(0);
  std::int32_t n = 0;
  for (std::size_t p = 0; p < marking.size(); ++p) {
    if (marking[p] != 0) {
      out.push_back(static_cast<std::int32_t>(p));
      out.push_back(marking[p]);
      ++n;
    }
  }
  out[count_at] = n;
  count_at = out.size();
  out.push_back(0);
  n = 0;
  for (std::size_t t = 0; t < clocks.size(); ++t) {
    if (clocks[t] >= 0) {
      out.push_back(static_cast<std::int32_t>(t));
      out.push_back(clocks[t]);
      ++n;
    }
  }
  out[count_at] = n;
}

bool enabled_in(const TimePetriNet& net, const std::vector<int>& marking, std::size_t t) {
  for (const auto& arc : net.inputs(t)) {
    if (marking[arc.place] < arc.weight) return false;
  }
  return true;
}

}  // namespace

ReachabilityGraph::ReachabilityGraph(std::vector<std::string> place_names,
                                     std::vector<std::string> transition_ids,
                                     const std::vector<GraphState>& states,
                                     std::vector<Edge> edges, StateIndex initial)
    : place_names_(std::move(place_names)),
      transition_ids_(std::move(transition_ids)),
      edges_(std::move(edges)),
      initial_(initial) {
  if (states.empty()) throw InvalidArgument("reachability graph needs at least one state");
  if (initial >= states.size()) throw InvalidArgument("initial state out of range");
  GraphBuilder builder(*this, states.size());
  for (const GraphState& s : states) {
    for (auto [p, n] : s.marking) {
      if (p < 0 || static_cast<std::size_t>(p) >= place_names_.size() || n <= 0) {
        throw InvalidArgument("state marking references invalid place or count");
      }
    }
    for (auto [t, c] : s.clocks) {
      if (t < 0 || static_cast<std::size_t>(t) >= transition_ids_.size() || c < 0) {
        throw InvalidArgument("state clock references invalid transition or value");
      }
    }
    encode(state_data_, s);
    if (!builder.intern().second) throw InvalidArgument("duplicate state in graph");
  }
  for (const Edge& e : edges_) {
    if (e.source >= states.size() || e.target >= states.size()) {
      throw InvalidArgument("edge endpoint out of range");
    }
    if (e.label != kTickLabel &&
        (e.label < 0 || static_cast<std::size_t>(e.label) >= transition_ids_.size())) {
      throw InvalidArgument("edge label out of range");
    }
  }
  finish_edges();
}

void ReachabilityGraph::finish_edges() {
  std::stable_sort(edges_.begin(), edges_.end(),
                   [](const Edge& a, const Edge& b) { return a.source < b.source; });
  const std::size_t n = state_count();
  edge_offsets_.assign(n + 1, 0);
  tick_edges_ = 0;
  for (const Edge& e : edges_) {
    ++edge_offsets_[e.source + 1];
    if (e.is_tick()) ++tick_edges_;
  }
  std::partial_sum(edge_offsets_.begin(), edge_offsets_.end(), edge_offsets_.begin());
}

std::string_view ReachabilityGraph::label_name(std::int32_t label) const {
  if (label == kTickLabel) return kTickName;
  return transition_ids_.at(static_cast<std::size_t>(label));
}

void ReachabilityGraph::decode(StateIndex s, std::vector<std::pair<int, int>>& marking,
                               std::vector<std::pair<int, int>>& clocks) const {
  marking.clear();
  clocks.clear();
  std::size_t i = state_offsets_.at(s);
  const std::int32_t nm = state_data_[i++];
  for (std::int32_t k = 0; k < nm; ++k, i += 2) marking.emplace_back(state_data_[i], state_data_[i + 1]);
  const std::int32_t nc = state_data_[i++];
  for (std::int32_t k = 0; k < nc; ++k, i += 2) clocks.emplace_back(state_data_[i], state_data_[i + 1]);
}

GraphState ReachabilityGraph::state(StateIndex s) const {
  GraphState out;
  decode(s, out.marking, out.clocks);
  return out;
}

int ReachabilityGraph::tokens(StateIndex s, int place) const {
  std::size_t i = state_offsets_.at(s);
  const std::int32_t nm = state_data_[i++];
  for (std::int32_t k = 0; k < nm; ++k, i += 2) {
    if (state_data_[i] == place) return state_data_[i + 1];
    if (state_data_[i] > place) break;
  }
  return 0;
}

bool ReachabilityGraph::has_enabled(StateIndex s) const {
  std::size_t i = state_offsets_.at(s);
  const std::int32_t nm = state_data_[i];
  return state_data_[i + 1 + 2 * static_cast<std::size_t>(nm)] > 0;
}

ReachabilityGraph build_reachability_graph(const TimePetriNet& net, std::size_t max_states) {
  if (max_states == 0) throw InvalidArgument("max_states must be positive");
  const std::size_t n_places = net.place_count();
  const std::size_t n_trans = net.transition_count();

  ReachabilityGraph g;
  g.place_names_ = net.places();
  for (const Transition& t : net.transitions()) g.transition_ids_.push_back(t.id);

  // Transitions whose enabling can change when t fires.
  std::vector<std::vector<std::size_t>> consumers(n_places);
  for (std::size_t t = 0; t < n_trans; ++t) {
    for (const auto& arc : net.inputs(t)) consumers[arc.place].push_back(t);
  }
  std::vector<std::vector<std::size_t>> affected(n_trans);
  for (std::size_t t = 0; t < n_trans; ++t) {
    std::vector<std::size_t>& a = affected[t];
    a.push_back(t);
    for (const auto& arc : net.inputs(t)) a.insert(a.end(), consumers[arc.place].begin(), consumers[arc.place].end());
    for (const auto& arc : net.outputs(t)) a.insert(a.end(), consumers[arc.place].begin(), consumers[arc.place].end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  std::vector<std::int64_t> eft(n_trans);
  std::vector<std::int64_t> lft(n_trans, -1);  // -1: unbounded
  for (std::size_t t = 0; t < n_trans; ++t) {
    eft[t] = net.transitions()[t].eft;
    if (net.transitions()[t].lft) lft[t] = *net.transitions()[t].lft;
  }

  GraphBuilder builder(g, max_states);
  std::vector<int> marking = net.initial_marking();
  std::vector<int> clocks(n_trans, -1);
  for (std::size_t t = 0; t < n_trans; ++t) {
    if (enabled_in(net, marking, t)) clocks[t] = 0;
  }
  encode_dense(builder.scratch(), marking, clocks);
  builder.intern();

  // The current state lives in dense arrays; each successor is applied in
  // place, encoded from the touched indices only, and undone again.
  std::fill(marking.begin(), marking.end(), 0);
  std::fill(clocks.begin(), clocks.end(), -1);
  std::vector<int> saved_marking(n_places);
  std::vector<int> saved_clocks(n_trans);
  std::vector<char> enabled_mid;
  std::vector<std::pair<int, int>> cur_marking;
  std::vector<std::pair<int, int>> cur_clocks;
  std::vector<int> places_extra;
  std::vector<int> trans_extra;

  // Writes the support of the current state merged with the touched indices,
  // skipping entries whose value is `absent`.
  auto emit_part = [](std::vector<std::int32_t>& out, const std::vector<std::pair<int, int>>& base,
                      std::vector<int>& extra, const std::vector<int>& value, int absent) {
    std::sort(extra.begin(), extra.end());
    const std::size_t at = out.size();
    out.resize(at + 1 + 2 * (base.size() + extra.size()));
    std::int32_t* w = out.data() + at + 1;
    std::size_t a = 0;
    std::size_t b = 0;
    int last = -1;
    while (a < base.size() || b < extra.size()) {
      int next;
      if (b == extra.size() || (a < base.size() && base[a].first <= extra[b])) {
        next = base[a++].first;
      } else {
        next = extra[b++];
      }
      if (next == last || value[next] == absent) continue;
      last = next;
      *w++ = next;
      *w++ = value[next];
    }
    const auto written = static_cast<std::size_t>(w - (out.data() + at + 1));
    out[at] = static_cast<std::int32_t>(written / 2);
    out.resize(at + 1 + written);
  };
  auto emit = [&](std::vector<std::int32_t>& out) {
    emit_part(out, cur_marking, places_extra, marking, 0);
    emit_part(out, cur_clocks, trans_extra, clocks, -1);
  };

  for (StateIndex s = 0; s < builder.size(); ++s) {
    g.decode(s, cur_marking, cur_clocks);
    for (auto [p, n] : cur_marking) marking[p] = n;
    bool tick_blocked = false;
    for (auto [t, c] : cur_clocks) {
      clocks[t] = c;
      if (lft[t] >= 0 && c >= lft[t]) tick_blocked = true;
    }

    for (auto [t, c] : cur_clocks) {
      if (c < eft[t]) continue;
      places_extra.clear();
      trans_extra.clear();
      const auto& aff = affected[t];
      for (const auto& arc : net.inputs(t)) {
        saved_marking[arc.place] = marking[arc.place];
        places_extra.push_back(arc.place);
      }
      for (const auto& arc : net.outputs(t)) {
        saved_marking[arc.place] = marking[arc.place];
        places_extra.push_back(arc.place);
      }
      for (std::size_t u : aff) saved_clocks[u] = clocks[u];

      for (const auto& arc : net.inputs(t)) marking[arc.place] -= arc.weight;
      enabled_mid.assign(aff.size(), 0);
      for (std::size_t k = 0; k < aff.size(); ++k) enabled_mid[k] = enabled_in(net, marking, aff[k]);
      for (const auto& arc : net.outputs(t)) marking[arc.place] += arc.weight;
      for (std::size_t k = 0; k < aff.size(); ++k) {
        const std::size_t u = aff[k];
        trans_extra.push_back(static_cast<int>(u));
        if (!enabled_in(net, marking, u)) {
          clocks[u] = -1;
        } else if (u == static_cast<std::size_t>(t) || saved_clocks[u] < 0 || !enabled_mid[k]) {
          clocks[u] = 0;
        }
      }
      emit(builder.scratch());
      builder.add_edge(s, t, builder.intern().first);

      for (const auto& arc : net.inputs(t)) marking[arc.place] = saved_marking[arc.place];
      for (const auto& arc : net.outputs(t)) marking[arc.place] = saved_marking[arc.place];
      for (std::size_t u : aff) clocks[u] = saved_clocks[u];
    }

    if (!cur_clocks.empty() && !tick_blocked) {
      places_extra.clear();
      trans_extra.clear();
      for (auto [t, c] : cur_clocks) {
        clocks[t] = lft[t] >= 0 ? c + 1 : static_cast<int>(std::min<std::int64_t>(c + 1, eft[t]));
      }
      emit(builder.scratch());
      builder.add_edge(s, kTickLabel, builder.intern().first);
    }

    for (auto [p, n] : cur_marking) marking[p] = 0;
    for (auto [t, c] : cur_clocks) clocks[t] = -1;
  }
  g.initial_ = 0;
  g.finish_edges();
  return g;
}

ReachabilityGraph abstract_time(const ReachabilityGraph& graph) {
  const std::size_t n = graph.state_count();
  std::vector<StateIndex> parent(n);
  std::iota(parent.begin(), parent.end(), StateIndex{0});
  auto find = [&](StateIndex x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const Edge& e : graph.edges()) {
    if (!e.is_tick()) continue;
    StateIndex a = find(e.source);
    StateIndex b = find(e.target);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  std::vector<StateIndex> cls(n);
  std::vector<StateIndex> class_of_root(n, static_cast<StateIndex>(-1));
  std::vector<GraphState> states;
  for (StateIndex s = 0; s < n; ++s) {
    StateIndex r = find(s);
    if (class_of_root[r] == static_cast<StateIndex>(-1)) {
      class_of_root[r] = static_cast<StateIndex>(states.size());
      states.push_back(graph.state(s));
    }
    cls[s] = class_of_root[r];
  }

  std::set<std::tuple<StateIndex, std::int32_t, StateIndex>> seen;
  std::vector<Edge> edges;
  for (const Edge& e : graph.edges()) {
    if (e.is_tick()) continue;
    Edge q{cls[e.source], e.label, cls[e.target]};
    if (seen.emplace(q.source, q.label, q.target).second) edges.push_back(q);
  }
  return ReachabilityGraph(graph.place_names(), graph.transition_ids(), states,
                           std::move(edges), cls[graph.initial()]);
}

StatePredicate parse_property(std::string_view text) {
  if (text == "deadlock") return DeadlockPredicate{};
  constexpr std::string_view prefix = "marking:";
  if (text.substr(0, prefix.size()) == prefix) {
    return MarkingPredicate{MarkingExpr(text.substr(prefix.size()))};
  }
  throw InvalidArgument("unknown property '" + std::string(text) +
                        "' (expected 'deadlock' or 'marking:<expr>')");
}

std::vector<StateIndex> find_violation_states(
    const ReachabilityGraph& graph,
    const std::function<bool(const ReachabilityGraph&, StateIndex)>& predicate) {
  std::vector<StateIndex> out;
  for (StateIndex s = 0; s < graph.state_count(); ++s) {
    if (predicate(graph, s)) out.push_back(s);
  }
  return out;
}

std::vector<StateIndex> find_violation_states(const ReachabilityGraph& graph,
                                              const StatePredicate& predicate) {
  if (std::holds_alternative<DeadlockPredicate>(predicate)) {
    return find_violation_states(graph, [](const ReachabilityGraph& g, StateIndex s) {
      return g.out_edges(s).empty();
    });
  }
  const MarkingExpr& expr = std::get<MarkingPredicate>(predicate).expr;
  std::vector<int> places;
  for (const std::string& id : expr.identifiers()) {
    auto it = std::find(graph.place_names().begin(), graph.place_names().end(), id);
    if (it == graph.place_names().end()) {
      throw InvalidArgument("marking predicate names unknown place '" + id + "'");
    }
    places.push_back(static_cast<int>(it - graph.place_names().begin()));
  }
  return find_violation_states(graph, [&](const ReachabilityGraph& g, StateIndex s) {
    return expr.evaluate([&](std::size_t slot) { return g.tokens(s, places[slot]); }) != 0;
  });
}

void write_dot(std::ostream& os, const ReachabilityGraph& graph) {
  os << "digraph reachability {\n";
  for (StateIndex s = 0; s < graph.state_count(); ++s) {
    os << "  s" << s << " [label=\"s" << s;
    const char* sep = "\\n";
    for (auto [p, n] : graph.state(s).marking) {
      os << sep << graph.place_names()[p] << "=" << n;
      sep = " ";
    }
    os << "\"";
    if (s == graph.initial()) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (const Edge& e : graph.edges()) {
    os << "  s" << e.source << " -> s" << e.target << " [label=\"" << graph.label_name(e.label)
       << "\"];\n";
  }
  os << "}\n";
}

}  // namespace flare
