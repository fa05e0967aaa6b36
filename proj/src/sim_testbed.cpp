#include "flare/sim_testbed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "flare/error.hpp"
#include "flare/parallel.hpp"
#include "flare/rng.hpp"

namespace flare {

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = sd = 0.0;
  if (xs.empty()) return;
  mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  sd = std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

int default_fault_count(int n_components) {
  return std::max(1, static_cast<int>(std::lround(0.2 * n_components)));
}

ComponentSystem generate_system(int n, double avg_io, int fault_count, std::uint64_t seed,
                                const SystemGenOptions& options) {
  if (n < 2) throw InvalidArgument("a system needs at least 2 components");
  if (fault_count < 0 || fault_count > n) {
    throw InvalidArgument("fault_count must lie in [0, " + std::to_string(n) + "]");
  }
  if (!std::isfinite(avg_io) || avg_io < 1.0) {
    throw InfeasibleTopology("avg_io " + std::to_string(avg_io) +
                             " is unreachable: every component needs an input and an output");
  }
  if (!(options.failure_probability >= 0.0 && options.failure_probability <= 1.0)) {
    throw InvalidArgument("failure probability must lie in [0,1]");
  }
  if (options.width_min <= 0.0 || options.width_max < options.width_min ||
      options.range_lo_max < options.range_lo_min) {
    throw InvalidArgument("invalid range options");
  }
  Rng rng(derive_seed(seed, {0x5151}));
  const int ports = static_cast<int>(std::lround(avg_io * n));

  // One port per side for everybody, the rest spread uniformly.
  auto spread = [&] {
    std::vector<int> count(n, 1);
    for (int k = n; k < ports; ++k) ++count[uniform_int(rng, 0, n - 1)];
    return count;
  };
  const std::vector<int> n_in = spread();
  const std::vector<int> n_out = spread();

  ComponentSystem sys;
  sys.seed = seed;
  sys.components.resize(n);
  for (int c = 0; c < n; ++c) sys.components[c].id = "c" + std::to_string(c);

  auto new_variable = [&](int source, int consumer) {
    Variable v;
    v.id = "v" + std::to_string(sys.variables.size());
    v.lo = uniform(rng, options.range_lo_min, options.range_lo_max);
    v.hi = v.lo + uniform(rng, options.width_min, options.width_max);
    v.source = source;
    v.consumer = consumer;
    sys.variables.push_back(v);
    return static_cast<int>(sys.variables.size() - 1);
  };

  std::vector<int> free_outputs;  // owning component of each open output port
  for (int c = 0; c < n; ++c) {
    for (int k = 0; k < n_in[c]; ++k) {
      // The boundary is one more option next to every open output port.
      int source = -1;
      const auto pick = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(free_outputs.size())));
      if (pick < free_outputs.size()) {
        source = free_outputs[pick];
        free_outputs.erase(free_outputs.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      const int var = new_variable(source, c);
      sys.components[c].inputs.push_back(var);
      if (source >= 0) sys.components[source].outputs.push_back(var);
    }
    for (int k = 0; k < n_out[c]; ++k) free_outputs.push_back(c);
  }
  for (int c : free_outputs) sys.components[c].outputs.push_back(new_variable(c, -1));
  for (Component& comp : sys.components) std::sort(comp.outputs.begin(), comp.outputs.end());

  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  for (int k = 0; k < fault_count; ++k) sys.components[ids[k]].failure_probability = options.failure_probability;
  return sys;
}

SimulatedDataset simulate(const ComponentSystem& system, int n_cases, std::uint64_t seed,
                          const SimOptions& options) {
  if (n_cases < 2) throw TooShort("simulation needs at least 2 test cases");
  if (!(options.propagation_probability >= 0.0 && options.propagation_probability <= 1.0)) {
    throw InvalidArgument("propagation probability must lie in [0,1]");
  }
  const std::vector<int> order = validate_system(system);
  SimulatedDataset data;
  data.seed = seed;
  data.values.assign(system.variables.size(), std::vector<double>(n_cases, 0.0));
  for (const Component& c : system.components) data.faulty.push_back(c.failure_probability > 0.0);

  for (int t = 0; t < n_cases; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    for (std::size_t v = 0; v < system.variables.size(); ++v) {
      const Variable& var = system.variables[v];
      if (var.source < 0) data.values[v][t] = uniform(rng, var.lo, var.hi);
    }
    for (int c : order) {
      const Component& comp = system.components[c];
      // Both draws are made unconditionally so one component's outcome never
      // shifts another's random stream.
      const double u_prop = uniform01(rng);
      const double u_fault = uniform01(rng);
      bool input_failed = false;
      for (int v : comp.inputs) input_failed = input_failed || !system.variables[v].passes(data.values[v][t]);
      const bool fails = (input_failed && u_prop < options.propagation_probability) ||
                         u_fault < comp.failure_probability;
      for (int v : comp.outputs) {
        const Variable& var = system.variables[v];
        const double span = var.hi - var.lo;
        data.values[v][t] = fails ? uniform(rng, var.hi + span / 100.0, var.hi + span) : uniform(rng, var.lo, var.hi);
      }
    }
  }
  return data;
}

double verdict_accuracy(const std::vector<DiagnosisVerdict>& verdicts, const std::vector<bool>& faulty) {
  if (verdicts.size() != faulty.size() || verdicts.empty()) {
    throw LengthMismatch("verdicts and ground truth differ in size");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    correct += (verdicts[i].status == Status::Faulty) == faulty[i];
  }
  return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

AccuracyReport evaluate_accuracy(const AccuracyParams& params,
                                 const std::function<void(const AccuracyCell&)>& on_cell) {
  if (params.components.empty() || params.avg_io.empty() || params.repeats < 1) {
    throw InvalidArgument("accuracy ranges must be non-empty");
  }
  if (params.cases < 2) throw TooShort("accuracy evaluation needs at least 2 test cases");

  struct Task {
    std::size_t cell;
    int repeat;
  };
  std::vector<AccuracyCell> cells;
  std::vector<Task> tasks;
  for (int n : params.components) {
    for (double io : params.avg_io) {
      AccuracyCell cell;
      cell.components = n;
      cell.avg_io = io;
      for (int r = 0; r < params.repeats; ++r) tasks.push_back({cells.size(), r});
      cells.push_back(cell);
    }
  }

  std::vector<double> accuracy(tasks.size(), 0.0);
  std::vector<std::string> errors(tasks.size());
  parallel_for(tasks.size(), params.workers, [&](std::size_t i) {
    const AccuracyCell& cell = cells[tasks[i].cell];
    const std::uint64_t base =
        derive_seed(params.seed, {static_cast<std::uint64_t>(cell.components),
                                  std::bit_cast<std::uint64_t>(cell.avg_io),
                                  static_cast<std::uint64_t>(tasks[i].repeat)});
    try {
      const int faults = params.fault_count >= 0 ? params.fault_count : default_fault_count(cell.components);
      const ComponentSystem sys =
          generate_system(cell.components, cell.avg_io, faults, derive_seed(base, {1}), params.generation);
      const SimulatedDataset data = simulate(sys, params.cases, derive_seed(base, {2}), params.simulation);
      DiagnosisOptions d = params.diagnosis;
      d.seed = derive_seed(base, {3});
      d.workers = 1;
      const SystemDiagnosis diag = diagnose_system(sys, data, d);
      accuracy[i] = verdict_accuracy(diag.verdicts, data.faulty);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  AccuracyReport report;
  std::vector<std::vector<double>> per_cell(cells.size());
  std::map<int, std::vector<double>> per_n;
  std::map<double, std::vector<double>> per_io;
  std::vector<double> all;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    AccuracyCell& cell = cells[tasks[i].cell];
    if (!errors[i].empty()) {
      ++cell.failed;
      if (cell.error.empty()) cell.error = errors[i];
      continue;
    }
    per_cell[tasks[i].cell].push_back(accuracy[i]);
    per_n[cell.components].push_back(accuracy[i]);
    per_io[cell.avg_io].push_back(accuracy[i]);
    all.push_back(accuracy[i]);
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    cells[c].repeats = static_cast<int>(per_cell[c].size());
    mean_std(per_cell[c], cells[c].accuracy_mean, cells[c].accuracy_std);
    if (on_cell) on_cell(cells[c]);
  }
  report.cells = cells;
  for (const auto& [n, xs] : per_n) {
    AccuracyCell cell;
    cell.components = n;
    cell.avg_io = std::nan("");
    cell.repeats = static_cast<int>(xs.size());
    mean_std(xs, cell.accuracy_mean, cell.accuracy_std);
    report.by_components.push_back(cell);
  }
  for (const auto& [io, xs] : per_io) {
    AccuracyCell cell;
    cell.components = 0;
    cell.avg_io = io;
    cell.repeats = static_cast<int>(xs.size());
    mean_std(xs, cell.accuracy_mean, cell.accuracy_std);
    report.by_avg_io.push_back(cell);
  }
  double sd = 0.0;
  mean_std(all, report.overall_mean, sd);
  return report;
}

}  // namespace flare
