#include "flare/tpn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "flare/error.hpp"

namespace flare {

namespace {

std::vector<TimePetriNet::Arc> compile_arcs(
    const std::map<std::string, int>& arcs,
    const std::map<std::string, std::size_t, std::less<>>& lookup,
    const std::string& transition, const char* kind) {
  std::vector<TimePetriNet::Arc> out;
  for (const auto& [place, weight] : arcs) {
    auto it = lookup.find(place);
    if (it == lookup.end()) {
      throw InvalidNet("transition '" + transition + "' has " + kind +
                       " arc to unknown place '" + place + "'");
    }
    if (weight <= 0) {
      throw InvalidNet("transition '" + transition + "' has non-positive " +
                       kind + " arc weight on place '" + place + "'");
    }
    out.push_back({static_cast<int>(it->second), weight});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.place < b.place; });
  return out;
}

std::int64_t integer_bound(const Json& v, const std::string& id,
                           const char* field) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::floor(d) == d && std::isfinite(d)) return static_cast<std::int64_t>(d);
    throw NonIntegerInterval("transition '" + id + "': " + field + " = " +
                             v.dump() + " is not an integer");
  }
  throw InvalidNet("transition '" + id + "': " + field + " must be a number");
}

}  // namespace

TimePetriNet::TimePetriNet(std::vector<std::string> places,
                           std::vector<Transition> transitions,
                           const std::map<std::string, int>& initial_marking)
    : places_(std::move(places)), transitions_(std::move(transitions)) {
  for (std::size_t i = 0; i < places_.size(); ++i) {
    if (!place_lookup_.emplace(places_[i], i).second) {
      throw InvalidNet("duplicate place '" + places_[i] + "'");
    }
  }
  initial_.assign(places_.size(), 0);
  for (const auto& [place, tokens] : initial_marking) {
    auto it = place_lookup_.find(place);
    if (it == place_lookup_.end()) {
      throw InvalidNet("initial marking names unknown place '" + place + "'");
    }
    if (tokens < 0) {
      throw InvalidNet("negative initial marking on place '" + place + "'");
    }
    initial_[it->second] = tokens;
  }
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    const Transition& tr = transitions_[t];
    if (!transition_lookup_.emplace(tr.id, t).second) {
      throw InvalidNet("duplicate transition '" + tr.id + "'");
    }
    if (tr.eft < 0) throw InvalidNet("transition '" + tr.id + "' has negative eft");
    if (tr.lft && *tr.lft < tr.eft) {
      throw InvalidNet("transition '" + tr.id + "' has lft < eft");
    }
    inputs_.push_back(compile_arcs(tr.input_arcs, place_lookup_, tr.id, "input"));
    outputs_.push_back(compile_arcs(tr.output_arcs, place_lookup_, tr.id, "output"));
  }
}

std::optional<std::size_t> TimePetriNet::place_index(std::string_view name) const {
  auto it = place_lookup_.find(name);
  if (it == place_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> TimePetriNet::transition_index(std::string_view id) const {
  auto it = transition_lookup_.find(id);
  if (it == transition_lookup_.end()) return std::nullopt;
  return it->second;
}

Json to_json(const TimePetriNet& net) {
  Json doc;
  doc["places"] = net.places();
  Json transitions = Json::array();
  for (const Transition& t : net.transitions()) {
    Json jt;
    jt["id"] = t.id;
    jt["eft"] = t.eft;
    jt["lft"] = t.lft ? Json(*t.lft) : Json(nullptr);
    jt["input_arcs"] = Json::object();
    for (const auto& [p, w] : t.input_arcs) jt["input_arcs"][p] = w;
    jt["output_arcs"] = Json::object();
    for (const auto& [p, w] : t.output_arcs) jt["output_arcs"][p] = w;
    transitions.push_back(std::move(jt));
  }
  doc["transitions"] = std::move(transitions);
  Json marking = Json::object();
  for (std::size_t p = 0; p < net.place_count(); ++p) {
    if (net.initial_marking()[p] != 0) marking[net.places()[p]] = net.initial_marking()[p];
  }
  doc["initial_marking"] = std::move(marking);
  return doc;
}

TimePetriNet net_from_json(const Json& doc) {
  try {
    std::vector<std::string> places = doc.at("places").get<std::vector<std::string>>();
    std::vector<Transition> transitions;
    for (const Json& jt : doc.at("transitions")) {
      Transition t;
      t.id = jt.at("id").get<std::string>();
      t.eft = integer_bound(jt.at("eft"), t.id, "eft");
      if (jt.contains("lft") && !jt.at("lft").is_null()) {
        t.lft = integer_bound(jt.at("lft"), t.id, "lft");
      }
      if (jt.contains("input_arcs")) {
        t.input_arcs = jt.at("input_arcs").get<std::map<std::string, int>>();
      }
      if (jt.contains("output_arcs")) {
        t.output_arcs = jt.at("output_arcs").get<std::map<std::string, int>>();
      }
      transitions.push_back(std::move(t));
    }
    std::map<std::string, int> marking;
    if (doc.contains("initial_marking")) {
      marking = doc.at("initial_marking").get<std::map<std::string, int>>();
    }
    return TimePetriNet(std::move(places), std::move(transitions), marking);
  } catch (const Json::exception& e) {
    throw InvalidNet(std::string("malformed net document: ") + e.what());
  }
}

}  // namespace flare
