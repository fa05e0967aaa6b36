#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace flare {

using Json = nlohmann::ordered_json;

/// A timed transition with its static firing interval [eft, lft].
/// An absent lft means the interval is unbounded on the right.
struct Transition {
  std::string id;
  std::int64_t eft = 0;
  std::optional<std::int64_t> lft;
  std::map<std::string, int> input_arcs;   // place -> multiplicity
  std::map<std::string, int> output_arcs;  // place -> multiplicity
};

/// Place/transition net with static firing intervals and an initial marking.
///
/// Construction validates the net and compiles the arcs to index form, so a
/// `TimePetriNet` value is always well formed. Places and transitions keep
/// the order they were given in; that order is the canonical index order used
/// by the reachability graph.
class TimePetriNet {
 public:
  struct Arc {
    int place;
    int weight;
  };

  TimePetriNet() = default;
  TimePetriNet(std::vector<std::string> places,
               std::vector<Transition> transitions,
               const std::map<std::string, int>& initial_marking);

  const std::vector<std::string>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::vector<int>& initial_marking() const { return initial_; }

  std::size_t place_count() const { return places_.size(); }
  std::size_t transition_count() const { return transitions_.size(); }

  // Index form of the arcs, sorted by place index.
  const std::vector<Arc>& inputs(std::size_t t) const { return inputs_[t]; }
  const std::vector<Arc>& outputs(std::size_t t) const { return outputs_[t]; }

  std::optional<std::size_t> place_index(std::string_view name) const;
  std::optional<std::size_t> transition_index(std::string_view id) const;

 private:
  std::vector<std::string> places_;
  std::vector<Transition> transitions_;
  std::vector<int> initial_;
  std::vector<std::vector<Arc>> inputs_;
  std::vector<std::vector<Arc>> outputs_;
  std::map<std::string, std::size_t, std::less<>> place_lookup_;
  std::map<std::string, std::size_t, std::less<>> transition_lookup_;
};

// JSON document: {places, transitions: [{id, eft, lft, input_arcs,
// output_arcs}], initial_marking}; lft null means unbounded.
Json to_json(const TimePetriNet& net);
TimePetriNet net_from_json(const Json& doc);

}  // namespace flare
