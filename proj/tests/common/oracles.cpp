#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "flare/error.hpp"

namespace flare::testing {

namespace {

struct DenseState {
  std::vector<int> marking;
  std::vector<int> clocks;  // -1: disabled

  bool operator<(const DenseState& o) const { return std::tie(marking, clocks) < std::tie(o.marking, o.clocks); }
};

bool enabled(const TimePetriNet& net, const std::vector<int>& m, std::size_t t) {
  for (const auto& [place, w] : net.transitions()[t].input_arcs) {
    if (m[*net.place_index(place)] < w) return false;
  }
  return true;
}

GraphState to_graph_state(const DenseState& d) {
  GraphState g;
  for (std::size_t p = 0; p < d.marking.size(); ++p) {
    if (d.marking[p] != 0) g.marking.emplace_back(static_cast<int>(p), d.marking[p]);
  }
  for (std::size_t t = 0; t < d.clocks.size(); ++t) {
    if (d.clocks[t] >= 0) g.clocks.emplace_back(static_cast<int>(t), d.clocks[t]);
  }
  return g;
}

std::map<std::string, std::size_t> collect(const ReachabilityGraph& g, const std::vector<bool>& member) {
  std::map<std::string, std::size_t> out;
  for (const Edge& e : g.edges()) {
    if (member[e.source] && !e.is_tick()) ++out[g.transition_ids()[static_cast<std::size_t>(e.label)]];
  }
  return out;
}

}  // namespace

NaiveGraph naive_reachability(const TimePetriNet& net, std::size_t max_states) {
  const std::size_t nt = net.transition_count();
  std::vector<std::int64_t> eft(nt), lft(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    eft[t] = net.transitions()[t].eft;
    lft[t] = net.transitions()[t].lft.value_or(-1);
  }
  DenseState init{net.initial_marking(), std::vector<int>(nt, -1)};
  for (std::size_t t = 0; t < nt; ++t) {
    if (enabled(net, init.marking, t)) init.clocks[t] = 0;
  }

  NaiveGraph out;
  std::map<DenseState, StateIndex> index;
  std::vector<DenseState> order;
  auto intern = [&](const DenseState& d) {
    auto [it, fresh] = index.emplace(d, static_cast<StateIndex>(order.size()));
    if (fresh) {
      if (order.size() >= max_states) throw StateSpaceOverflow("naive explorer hit its cap");
      order.push_back(d);
    }
    return it->second;
  };
  intern(init);
  for (std::size_t s = 0; s < order.size(); ++s) {
    const DenseState cur = order[s];
    bool any_enabled = false;
    bool at_deadline = false;
    for (std::size_t t = 0; t < nt; ++t) {
      if (cur.clocks[t] < 0) continue;
      any_enabled = true;
      if (lft[t] >= 0 && cur.clocks[t] >= lft[t]) at_deadline = true;
    }
    for (std::size_t t = 0; t < nt; ++t) {
      if (cur.clocks[t] < eft[t]) continue;  // disabled clocks are -1
      DenseState next = cur;
      for (const auto& [place, w] : net.transitions()[t].input_arcs) next.marking[*net.place_index(place)] -= w;
      const std::vector<int> mid = next.marking;
      for (const auto& [place, w] : net.transitions()[t].output_arcs) next.marking[*net.place_index(place)] += w;
      for (std::size_t u = 0; u < nt; ++u) {
        if (!enabled(net, next.marking, u)) {
          next.clocks[u] = -1;
        } else if (u == t || cur.clocks[u] < 0 || !enabled(net, mid, u)) {
          next.clocks[u] = 0;
        }
      }
      out.edges.push_back({static_cast<StateIndex>(s), static_cast<std::int32_t>(t), intern(next)});
    }
    if (any_enabled && !at_deadline) {
      DenseState next = cur;
      for (std::size_t t = 0; t < nt; ++t) {
        if (next.clocks[t] < 0) continue;
        next.clocks[t] = lft[t] >= 0 ? next.clocks[t] + 1 : static_cast<int>(std::min<std::int64_t>(next.clocks[t] + 1, eft[t]));
      }
      out.edges.push_back({static_cast<StateIndex>(s), kTickLabel, intern(next)});
    }
  }
  for (const DenseState& d : order) out.states.push_back(to_graph_state(d));
  return out;
}

std::map<std::string, std::size_t> simple_path_trace(const ReachabilityGraph& g, StateIndex violation) {
  const std::size_t n = g.state_count();
  std::vector<bool> on_path(n, false);
  std::vector<bool> member(n, false);
  std::vector<StateIndex> path;
  std::function<void(StateIndex)> dfs = [&](StateIndex s) {
    if (s == violation) {
      for (StateIndex p : path) member[p] = true;
      return;
    }
    on_path[s] = true;
    path.push_back(s);
    for (const Edge& e : g.out_edges(s)) {
      if (!on_path[e.target]) dfs(e.target);
    }
    path.pop_back();
    on_path[s] = false;
  };
  dfs(g.initial());
  return collect(g, member);
}

std::map<std::string, std::size_t> closure_trace(const ReachabilityGraph& g, StateIndex violation) {
  const std::size_t n = g.state_count();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = 1;
  for (const Edge& e : g.edges()) r[e.source][e.target] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!r[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) r[i][j] = r[i][j] || r[k][j];
    }
  }
  std::vector<bool> member(n, false);
  for (std::size_t s = 0; s < n; ++s) member[s] = s != violation && r[g.initial()][s] && r[s][violation];
  return collect(g, member);
}

ReachabilityGraph random_graph(std::size_t n, std::size_t labels, double edge_prob, bool dag, double tick_share,
                               Rng& rng) {
  std::vector<std::string> ids;
  for (std::size_t l = 0; l < labels; ++l) ids.push_back("t" + std::to_string(l));
  std::vector<GraphState> states(n);
  for (std::size_t i = 0; i < n; ++i) states[i].marking = {{0, static_cast<int>(i + 1)}};
  std::vector<Edge> edges;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t d = dag ? s + 1 : 0; d < n; ++d) {
      if (uniform01(rng) >= edge_prob) continue;
      const std::int32_t label = uniform01(rng) < tick_share
                                     ? kTickLabel
                                     : static_cast<std::int32_t>(uniform_int(rng, 0, static_cast<std::int64_t>(labels) - 1));
      edges.push_back({static_cast<StateIndex>(s), label, static_cast<StateIndex>(d)});
    }
  }
  return ReachabilityGraph({"p"}, ids, states, edges, 0);
}

BruteForceHmm brute_force(const Hmm& h, const std::vector<int>& obs) {
  const std::size_t n = h.n_states();
  const std::size_t len = obs.size();
  std::vector<int> path(len, 0);
  std::vector<std::pair<double, std::vector<int>>> all;
  BruteForceHmm out;
  while (true) {
    double p = h.initial()[path[0]] * h.emission()[path[0]][obs[0]];
    for (std::size_t t = 1; t < len; ++t) p *= h.transition()[path[t - 1]][path[t]] * h.emission()[path[t]][obs[t]];
    out.probability += p;
    all.emplace_back(p, path);
    // Odometer increment over state paths.
    std::size_t k = 0;
    while (k < len && ++path[k] == static_cast<int>(n)) path[k++] = 0;
    if (k == len) break;
  }
  for (const auto& [p, _] : all) out.best = std::max(out.best, p);
  for (const auto& [p, q] : all) {
    if (out.best > 0.0 && p >= out.best * (1.0 - 1e-12)) out.best_paths.push_back(q);
  }
  return out;
}

Hmm random_hmm(std::size_t n, std::size_t m, bool sparse, bool flat, Rng& rng) {
  auto fix = [&](Matrix rows) {
    for (auto& row : rows) {
      if (flat && uniform01(rng) < 0.5) std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
      if (sparse && row.size() > 1 && uniform01(rng) < 0.5) {
        const auto k = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(row.size()) - 1));
        const double moved = row[k];
        row[k] = 0.0;
        double& target = row[(k + 1) % row.size()];
        target = std::min(1.0, target + moved);
      }
    }
    return rows;
  };
  Matrix init = fix(random_row_stochastic(1, n, rng));
  return Hmm(init[0], fix(random_row_stochastic(n, n, rng)), fix(random_row_stochastic(n, m, rng)));
}

}  // namespace flare::testing
