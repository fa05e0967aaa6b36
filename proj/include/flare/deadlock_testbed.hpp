#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "flare/ranking.hpp"
#include "flare/tpn.hpp"

namespace flare {

struct Interval {
  std::int64_t eft = 1;
  std::int64_t lft = 10;
};

enum class Encoding {
  // acquire r_j, run the task, release r_j: a process never holds two resources
  sequential,
  // the acquire of the next resource hands back the previous one, so a process
  // keeps its last resource while it waits (hold and wait, circular wait)
  hold_and_wait,
};

/// Parameters of one process/resource system S(P, R, M).
struct SystemSpec {
  int processes = 2;
  int resources = 1;
  std::vector<std::vector<bool>> access;               // processes x resources
  std::vector<std::vector<Interval>> task_intervals;  // processes x resources
  int fault_count = 0;
  std::uint64_t seed = 0;
  Encoding encoding = Encoding::sequential;
};

struct GenerationOptions {
  Interval interval_range{1, 10};  // bounds for random task intervals
  std::int64_t max_width = 9;      // lft - eft of a drawn interval is at most this
  double min_density = 0.5;        // access-matrix density is drawn per case
  double max_density = 1.0;
  Encoding encoding = Encoding::sequential;
};

struct GeneratedCase {
  SystemSpec spec;
  TimePetriNet net;
  std::set<std::string> faulty_transitions;
};

/// Draws the access matrix and task intervals for S(p, r, M).
SystemSpec random_spec(int processes, int resources, int fault_count, std::uint64_t seed,
                       const GenerationOptions& options = {});

/// Builds the net: every process is a ring of (acquire r_j, task on r_j)
/// segments, one per accessed resource, in a random order. Acquires are
/// immediate ([0,0]); tasks take their interval. The release of a resource
/// sits on the task (sequential) or on the next acquire (hold_and_wait, where
/// a one-off start transition takes the first resource). `fault_count`
/// releasing transitions picked at random drop their release arc and form
/// the ground truth. A process with a single resource is always sequential.
/// Fully determined by `spec`.
GeneratedCase generate_case(const SystemSpec& spec);

Json to_json(const SystemSpec& spec);
SystemSpec spec_from_json(const Json& doc);
Json to_json(const GeneratedCase& c);
GeneratedCase case_from_json(const Json& doc);

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct CampaignParams {
  IntRange processes{5, 20};
  IntRange resources{5, 20};
  IntRange faults{1, 9};
  int cases_per_fault = 100;
  std::uint64_t seed = 7;
  std::size_t max_states = 10'000;
  int max_attempts = 20000;  // per case, across deadlock-free and overflowing draws
  unsigned workers = 0;    // 0: hardware concurrency
  bool abstract_time = false;
  GenerationOptions generation;
};

struct CaseRecord {
  std::size_t case_id = 0;
  int faults = 0;
  int processes = 0;
  int resources = 0;
  std::uint64_t seed = 0;          // seed of the accepted draw
  int attempts = 0;
  int no_deadlock = 0;             // draws rejected for lacking a deadlock
  int overflow = 0;                // draws rejected by the state cap
  bool ok = false;
  std::size_t states = 0;
  std::size_t edges = 0;
  std::size_t violations = 0;
  std::size_t model_transitions = 0;
  ExamResult exam;
  double seconds = 0.0;            // graph build + ranking
};

struct FaultSummary {
  int faults = 0;
  std::size_t tests = 0;
  std::size_t rejected_no_deadlock = 0;
  std::size_t rejected_overflow = 0;
  std::size_t failed = 0;
  double avg_states = 0, avg_edges = 0, avg_seconds = 0;
  double best_exam = 0, best_exam_var = 0, best_rank = 0, best_rank_var = 0;
  double worst_exam = 0, worst_exam_var = 0, worst_rank = 0, worst_rank_var = 0;
  double exam = 0, exam_var = 0, rank = 0, rank_var = 0;  // id tie-break
  double avg_exam = 0, avg_rank = 0;                      // (best + worst) / 2
};

struct CampaignReport {
  CampaignParams params;
  std::vector<CaseRecord> cases;
  std::vector<FaultSummary> summary;
};

/// Evaluates one drawn case: build graph, find deadlocks, rank, EXAM.
CaseRecord evaluate_case(const GeneratedCase& c, std::size_t max_states, bool abstract_time);

CampaignReport run_campaign(const CampaignParams& params,
                            const std::function<void(const CaseRecord&)>& on_case = {});

std::vector<FaultSummary> summarize(const std::vector<CaseRecord>& cases);

}  // namespace flare
