#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "flare/diagnosis.hpp"
#include "flare/system.hpp"

namespace flare {

struct SystemGenOptions {
  double failure_probability = 0.7;  // for components with an injected fault
  double range_lo_min = -100.0;      // lo ~ U[range_lo_min, range_lo_max]
  double range_lo_max = 100.0;
  double width_min = 1.0;            // hi - lo ~ U[width_min, width_max]
  double width_max = 100.0;
};

/// Fault count used when none is given: max(1, round(0.2 n)).
int default_fault_count(int n_components);

/// Random acyclic architecture. Every component gets at least one input and
/// one output port and the port totals are round(avg_io * n) on each side, so
/// the mean input and the mean output count both equal avg_io up to
/// rounding. Components are wired in index order: each input port picks
/// uniformly among the still unconnected output ports of earlier components
/// and the system boundary; unused output ports are boundary outputs. Each
/// connection and each boundary port is its own variable with a random
/// range. `fault_count` distinct components get `failure_probability`, the
/// others 0.
///
/// Throws InvalidArgument for n < 2 or fault_count outside [0, n], and
/// InfeasibleTopology when avg_io < 1 (a component needs one port per side).
ComponentSystem generate_system(int n_components, double avg_io, int fault_count, std::uint64_t seed,
                                const SystemGenOptions& options = {});

struct SimOptions {
  // Chance that a component with a failing input fails its outputs.
  double propagation_probability = 1.0;
};

/// Per test case, in topological order: boundary inputs are uniform in range;
/// a component fails when an input fails (with the propagation probability)
/// or, if it has a nonzero failure probability, by that chance. A failing
/// component puts every output uniformly in [hi + span/100, hi + span];
/// otherwise outputs are uniform in [lo, hi]. Throws TooShort for n_cases < 2.
SimulatedDataset simulate(const ComponentSystem& system, int n_cases, std::uint64_t seed,
                          const SimOptions& options = {});

/// Fraction of components whose verdict matches the ground truth.
double verdict_accuracy(const std::vector<DiagnosisVerdict>& verdicts, const std::vector<bool>& faulty);

struct AccuracyParams {
  std::vector<int> components{5, 10, 15, 20};
  std::vector<double> avg_io{1.0, 2.0, 3.0};
  int cases = 100;
  int repeats = 40;
  int fault_count = -1;  // -1: default_fault_count(n)
  std::uint64_t seed = 3;
  unsigned workers = 0;
  SystemGenOptions generation;
  SimOptions simulation;
  DiagnosisOptions diagnosis;  // seed and workers are set per system
};

struct AccuracyCell {
  int components = 0;
  double avg_io = 0.0;
  int repeats = 0;        // systems evaluated
  int failed = 0;         // systems that raised an error
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  std::string error;      // first error message, if any
};

struct AccuracyReport {
  std::vector<AccuracyCell> cells;       // every (components, avg_io) pair
  std::vector<AccuracyCell> by_components;
  std::vector<AccuracyCell> by_avg_io;
  double overall_mean = 0.0;
};

AccuracyReport evaluate_accuracy(const AccuracyParams& params,
                                 const std::function<void(const AccuracyCell&)>& on_cell = {});

}  // namespace flare
