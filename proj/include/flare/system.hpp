#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flare/tpn.hpp"

namespace flare {

/// A variable carries one value per test case. It is written by exactly one
/// output port (or by the environment when `source` is -1) and read by at
/// most one input port (`consumer` -1: observed at the system boundary).
struct Variable {
  std::string id;
  double lo = 0.0;
  double hi = 1.0;
  int source = -1;
  int consumer = -1;

  bool passes(double value) const { return value >= lo && value <= hi; }
};

struct Component {
  std::string id;
  double failure_probability = 0.0;
  std::vector<int> inputs;   // variable indices
  std::vector<int> outputs;  // variable indices
};

struct ComponentSystem {
  std::vector<Component> components;
  std::vector<Variable> variables;
  std::uint64_t seed = 0;
};

/// Checks indices, port/variable agreement and acyclicity; throws
/// InvalidArgument. Returns a topological order of the components.
std::vector<int> validate_system(const ComponentSystem& system);

struct SimulatedDataset {
  std::vector<std::vector<double>> values;  // variables x cases
  std::vector<bool> faulty;                 // ground truth per component
  std::uint64_t seed = 0;

  std::size_t case_count() const { return values.empty() ? 0 : values[0].size(); }
};

Json to_json(const ComponentSystem& system);
ComponentSystem system_from_json(const Json& doc);
Json to_json(const SimulatedDataset& data);
SimulatedDataset dataset_from_json(const Json& doc);

}  // namespace flare
