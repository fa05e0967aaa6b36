#pragma once

#include <string>
#include <vector>

#include "flare/reachability.hpp"
#include "flare/tpn.hpp"

namespace flare::testing {

// Error-trace example graph. On-path states s0..s3 lead to the violation
// state sv; s4..s7 are correct branches that never reach sv.
//   s0: t0->s1
//   s1: t1->s2, t2->s4
//   s2: t1->s3, t5->s7, t4->s5
//   s3: t2->s6, t3->sv, t4->s5
// Expected trace: {t0, t1, t2, t1, t5, t4, t2, t3, t4}.
struct TraceFixture {
  ReachabilityGraph graph;
  StateIndex violation = 0;
};

inline TraceFixture trace_fixture() {
  std::vector<std::string> labels = {"t0", "t1", "t2", "t3", "t4", "t5"};
  // s0..s7 are indices 0..7, sv is 8. Each state gets a distinct marking.
  std::vector<GraphState> states(9);
  for (int i = 0; i < 9; ++i) states[i].marking = {{0, i + 1}};
  auto e = [](StateIndex s, std::int32_t t, StateIndex d) { return Edge{s, t, d}; };
  std::vector<Edge> edges = {
      e(0, 0, 1),                          // s0
      e(1, 1, 2), e(1, 2, 4),              // s1
      e(2, 1, 3), e(2, 5, 7), e(2, 4, 5),  // s2
      e(3, 2, 6), e(3, 3, 8), e(3, 4, 5),  // s3
      e(4, 0, 7), e(5, 3, 6), e(7, 1, 6),  // correct region
  };
  return {ReachabilityGraph({"p"}, labels, states, edges, 0), 8};
}

// Two processes that each fire once: A in [5,10], B in [3,7].
inline TimePetriNet two_task_net() {
  std::vector<Transition> ts(2);
  ts[0].id = "A";
  ts[0].eft = 5;
  ts[0].lft = 10;
  ts[0].input_arcs = {{"readyA", 1}};
  ts[0].output_arcs = {{"doneA", 1}};
  ts[1].id = "B";
  ts[1].eft = 3;
  ts[1].lft = 7;
  ts[1].input_arcs = {{"readyB", 1}};
  ts[1].output_arcs = {{"doneB", 1}};
  return TimePetriNet({"readyA", "readyB", "doneA", "doneB"}, ts, {{"readyA", 1}, {"readyB", 1}});
}

inline constexpr const char* kTwoTaskViolation = "marking:doneA >= 1 && doneB == 0";

}  // namespace flare::testing
