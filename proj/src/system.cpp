#include "flare/system.hpp"

#include <cmath>
#include <queue>
#include <set>

#include "flare/error.hpp"

namespace flare {

std::vector<int> validate_system(const ComponentSystem& system) {
  const int n = static_cast<int>(system.components.size());
  const int v = static_cast<int>(system.variables.size());
  if (n == 0) throw InvalidArgument("system has no components");
  std::set<std::string> ids;
  for (const Component& c : system.components) {
    if (!ids.insert(c.id).second) throw InvalidArgument("duplicate component id '" + c.id + "'");
    if (!(c.failure_probability >= 0.0 && c.failure_probability <= 1.0)) {
      throw InvalidArgument("failure probability of '" + c.id + "' outside [0,1]");
    }
  }
  for (const Variable& var : system.variables) {
    if (!std::isfinite(var.lo) || !std::isfinite(var.hi) || var.lo > var.hi) {
      throw InvalidArgument("variable '" + var.id + "' has an invalid range");
    }
    if (var.source < -1 || var.source >= n || var.consumer < -1 || var.consumer >= n) {
      throw InvalidArgument("variable '" + var.id + "' references an unknown component");
    }
  }
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> succ(n);
  for (int c = 0; c < n; ++c) {
    for (int x : system.components[c].inputs) {
      if (x < 0 || x >= v || system.variables[x].consumer != c) {
        throw InvalidArgument("input port of '" + system.components[c].id + "' disagrees with its variable");
      }
    }
    for (int x : system.components[c].outputs) {
      if (x < 0 || x >= v || system.variables[x].source != c) {
        throw InvalidArgument("output port of '" + system.components[c].id + "' disagrees with its variable");
      }
    }
  }
  for (const Variable& var : system.variables) {
    if (var.source >= 0 && var.consumer >= 0) {
      succ[var.source].push_back(var.consumer);
      ++indegree[var.consumer];
    }
  }
  // Kahn's algorithm, smallest index first for a canonical order.
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int c = 0; c < n; ++c) {
    if (indegree[c] == 0) ready.push(c);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    const int c = ready.top();
    ready.pop();
    order.push_back(c);
    for (int d : succ[c]) {
      if (--indegree[d] == 0) ready.push(d);
    }
  }
  if (static_cast<int>(order.size()) != n) throw InvalidArgument("component wiring has a cycle");
  return order;
}

Json to_json(const ComponentSystem& system) {
  Json doc;
  doc["schema"] = 1;
  doc["seed"] = system.seed;
  Json comps = Json::array();
  for (const Component& c : system.components) {
    comps.push_back({{"id", c.id},
                     {"failure_probability", c.failure_probability},
                     {"inputs", c.inputs},
                     {"outputs", c.outputs}});
  }
  Json vars = Json::array();
  for (const Variable& v : system.variables) {
    vars.push_back({{"id", v.id}, {"lo", v.lo}, {"hi", v.hi}, {"source", v.source}, {"consumer", v.consumer}});
  }
  doc["components"] = std::move(comps);
  doc["variables"] = std::move(vars);
  return doc;
}

ComponentSystem system_from_json(const Json& doc) {
  ComponentSystem s;
  try {
    s.seed = doc.value("seed", std::uint64_t{0});
    for (const Json& c : doc.at("components")) {
      Component comp;
      comp.id = c.at("id").get<std::string>();
      comp.failure_probability = c.value("failure_probability", 0.0);
      comp.inputs = c.at("inputs").get<std::vector<int>>();
      comp.outputs = c.at("outputs").get<std::vector<int>>();
      s.components.push_back(std::move(comp));
    }
    for (const Json& v : doc.at("variables")) {
      Variable var;
      var.id = v.at("id").get<std::string>();
      var.lo = v.at("lo").get<double>();
      var.hi = v.at("hi").get<double>();
      var.source = v.value("source", -1);
      var.consumer = v.value("consumer", -1);
      s.variables.push_back(std::move(var));
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed component system: ") + e.what());
  }
  validate_system(s);
  return s;
}

Json to_json(const SimulatedDataset& data) {
  Json doc;
  doc["schema"] = 1;
  doc["seed"] = data.seed;
  doc["values"] = data.values;
  Json faulty = Json::array();
  for (bool f : data.faulty) faulty.push_back(f);
  doc["faulty"] = std::move(faulty);
  return doc;
}

SimulatedDataset dataset_from_json(const Json& doc) {
  SimulatedDataset d;
  try {
    d.seed = doc.value("seed", std::uint64_t{0});
    d.values = doc.at("values").get<std::vector<std::vector<double>>>();
    if (doc.contains("faulty")) {
      for (const Json& f : doc.at("faulty")) d.faulty.push_back(f.get<bool>());
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed dataset: ") + e.what());
  }
  for (const auto& row : d.values) {
    if (row.size() != d.case_count()) throw InvalidArgument("dataset rows differ in length");
  }
  return d;
}

}  // namespace flare
