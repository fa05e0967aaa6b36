#include "flare/diagnosis.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "flare/error.hpp"
#include "flare/parallel.hpp"

namespace flare {

namespace {

void check_omega(double omega) {
  if (!(omega >= 0.0 && omega <= 1.0)) {
    throw OutOfRange("omega must lie in [0,1], got " + std::to_string(omega));
  }
}

// Candidates meeting both thresholds beat all others; then (mu, rho).
bool better(double mu, double rho, bool ok, double best_mu, double best_rho, bool best_ok) {
  return std::tie(ok, mu, rho) > std::tie(best_ok, best_mu, best_rho);
}

}  // namespace

std::vector<double> build_initial_matrix(double omega) {
  check_omega(omega);
  return {(1.0 - omega) / 2.0, (1.0 - omega) / 2.0, omega / 2.0, omega / 2.0};
}

Matrix build_transition_matrix(const Rates& r, double omega) {
  check_omega(omega);
  for (double x : {r.alpha, r.beta, r.gamma, r.delta}) {
    if (!std::isfinite(x) || x < 0.0) throw InvalidArgument("rates must be non-negative");
  }
  const double sum = r.alpha + r.beta + r.gamma + r.delta;
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("rates sum to " + std::to_string(sum));
  const double pass = r.alpha + r.beta;
  const double fail = r.gamma + r.delta;
  if (pass <= 0.0) throw DegenerateRates("alpha + beta is 0: no transition out of a passed input");
  if (fail <= 0.0) throw DegenerateRates("gamma + delta is 0: no transition out of a failed input");
  const std::vector<double> from_pass = {r.alpha * (1.0 - omega) / pass, r.beta * (1.0 - omega) / pass,
                                         r.alpha * omega / pass, r.beta * omega / pass};
  const std::vector<double> from_fail = {r.gamma * (1.0 - omega) / fail, r.delta * (1.0 - omega) / fail,
                                         r.gamma * omega / fail, r.delta * omega / fail};
  return {from_pass, from_fail, from_pass, from_fail};
}

Rates estimate_rates(const std::vector<std::vector<bool>>& inputs, bool smooth) {
  if (inputs.empty()) throw TooShort("rate estimation needs at least one input sequence");
  double pp = 0, pf = 0, fp = 0, ff = 0;
  for (const auto& seq : inputs) {
    if (seq.size() < 2) throw TooShort("input sequences need at least 2 test cases");
    for (std::size_t t = 1; t < seq.size(); ++t) {
      if (seq[t - 1]) {
        (seq[t] ? pp : pf) += 1;
      } else {
        (seq[t] ? fp : ff) += 1;
      }
    }
  }
  if (smooth && (pp + pf == 0 || fp + ff == 0)) {
    pp += 1;
    pf += 1;
    fp += 1;
    ff += 1;
  }
  const double total = pp + pf + fp + ff;
  return {pp / total, pf / total, fp / total, ff / total};
}

std::vector<int> observation_sequence(const TestResults& tests) {
  if (tests.outputs.empty()) throw TooShort("test results have no output stream");
  const std::size_t n = tests.outputs[0].size();
  if (n < 2) throw TooShort("test results need at least 2 test cases");
  std::vector<int> obs(n, kOp);
  for (const auto& stream : tests.outputs) {
    if (stream.size() != n) throw LengthMismatch("output streams differ in length");
    for (std::size_t t = 0; t < n; ++t) {
      if (!stream[t]) obs[t] = kOf;
    }
  }
  return obs;
}

std::vector<bool> all_passed(const std::vector<std::vector<bool>>& streams, std::size_t length) {
  std::vector<bool> out(length, true);
  for (const auto& s : streams) {
    if (s.size() != length) throw LengthMismatch("input streams differ in length");
    for (std::size_t t = 0; t < length; ++t) out[t] = out[t] && s[t];
  }
  return out;
}

double matching_level(const std::vector<bool>& derived, const std::vector<bool>& actual) {
  if (derived.size() != actual.size()) {
    throw LengthMismatch("matching level needs equal lengths (" + std::to_string(derived.size()) +
                         " vs " + std::to_string(actual.size()) + ")");
  }
  if (derived.empty()) throw LengthMismatch("matching level needs non-empty sequences");
  std::size_t agree = 0;
  for (std::size_t t = 0; t < derived.size(); ++t) agree += derived[t] == actual[t];
  return static_cast<double>(agree) / static_cast<double>(derived.size());
}

ComponentModel make_component_model(std::string id, const Rates& rates, double omega) {
  ComponentModel cm;
  cm.id = std::move(id);
  cm.omega = omega;
  cm.rates = rates;
  cm.hmm = Hmm(build_initial_matrix(omega), build_transition_matrix(rates, omega),
               Matrix(4, std::vector<double>{0.5, 0.5}));
  return cm;
}

void set_emission(ComponentModel& cm, const Matrix& emission) {
  cm.hmm = Hmm(cm.hmm.initial(), cm.hmm.transition(), emission);
}

double confidence_level(const ComponentModel& cm, const std::vector<int>& obs) {
  const double logp = sequence_log_probability(cm.hmm, obs);
  return std::exp(logp / static_cast<double>(obs.size()));
}

Matrix sample_emission(Rng& rng, bool constrained) {
  if (!constrained) return random_row_stochastic(4, 2, rng);
  Matrix rows = random_row_stochastic(3, 2, rng);
  // rows[0]: healthy with passed inputs, rows[1]: faulty with passed inputs,
  // rows[2]: failed inputs (whatever the component's own health).
  if (rows[0][kOf] > rows[1][kOf]) std::swap(rows[0], rows[1]);
  return {rows[0], rows[2], rows[1], rows[2]};
}

SearchResult search_emission_matrix(ComponentModel& cm, const TestResults& tests,
                                    const std::vector<std::vector<bool>>& pred_outputs,
                                    const SearchOptions& options, Rng& rng) {
  if (options.max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  if (!(options.mu_min >= 0.0 && options.mu_min <= 1.0) ||
      !(options.rho_min >= 0.0 && options.rho_min <= 1.0)) {
    throw OutOfRange("search thresholds must lie in [0,1]");
  }
  const std::vector<int> obs = observation_sequence(tests);
  const std::vector<bool> actual = all_passed(pred_outputs, obs.size());

  SearchResult best;
  bool best_ok = false;
  std::vector<bool> derived(obs.size());
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    Matrix emission = sample_emission(rng, options.constrained);
    const Hmm h(cm.hmm.initial(), cm.hmm.transition(), emission);
    double mu = 0.0;
    double rho = 0.0;
    try {
      const std::vector<int> states = most_likely_states(h, obs);
      for (std::size_t t = 0; t < states.size(); ++t) derived[t] = input_passed(states[t]);
      mu = matching_level(derived, actual);
      rho = std::exp(sequence_log_probability(h, obs) / static_cast<double>(obs.size()));
    } catch (const ZeroProbabilitySequence&) {
      // Impossible under this candidate; it scores (0, 0).
    }
    const bool ok = mu >= options.mu_min && rho >= options.rho_min;
    if (iter == 1 || better(mu, rho, ok, best.mu, best.rho, best_ok)) {
      best.emission = std::move(emission);
      best.mu = mu;
      best.rho = rho;
      best_ok = ok;
    }
    best.iterations = iter;
    if (ok) break;
  }
  best.converged = best_ok;
  set_emission(cm, best.emission);
  cm.mu = best.mu;
  cm.rho = best.rho;
  cm.searched = true;
  return best;
}

const char* to_string(Status s) { return s == Status::Faulty ? "faulty" : "passed"; }

DiagnosisVerdict diagnose_component(const ComponentModel& cm, const TestResults& tests) {
  if (!cm.searched) throw MissingDiagnosis("component '" + cm.id + "' has no searched HMM");
  const std::vector<int> obs = observation_sequence(tests);
  DiagnosisVerdict v;
  v.component = cm.id;
  v.mu = cm.mu;
  v.rho = cm.rho;
  v.states = most_likely_states(cm.hmm, obs);
  const auto faulty = std::count_if(v.states.begin(), v.states.end(), component_faulty);
  v.faulty_fraction = static_cast<double>(faulty) / static_cast<double>(v.states.size());
  v.status = 2 * static_cast<std::size_t>(faulty) >= v.states.size() ? Status::Faulty : Status::Passed;
  return v;
}

std::vector<RankedComponent> rank_components(const ComponentSystem& system,
                                             const std::vector<DiagnosisVerdict>& verdicts) {
  std::vector<RankedComponent> out;
  for (const Component& c : system.components) {
    auto it = std::find_if(verdicts.begin(), verdicts.end(),
                           [&](const DiagnosisVerdict& v) { return v.component == c.id; });
    if (it == verdicts.end()) throw MissingDiagnosis("component '" + c.id + "' was not diagnosed");
    out.push_back({0, *it});
  }
  std::sort(out.begin(), out.end(), [](const RankedComponent& x, const RankedComponent& y) {
    const DiagnosisVerdict& a = x.verdict;
    const DiagnosisVerdict& b = y.verdict;
    if (a.status != b.status) return a.status == Status::Faulty;
    if (a.status == Status::Faulty) {
      return std::tie(b.rho, b.mu, a.component) < std::tie(a.rho, a.mu, b.component);
    }
    return std::tie(b.faulty_fraction, a.mu, b.rho, a.component) <
           std::tie(a.faulty_fraction, b.mu, a.rho, b.component);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

SystemDiagnosis diagnose_system(const ComponentSystem& system, const SimulatedDataset& data,
                                const DiagnosisOptions& options) {
  validate_system(system);
  if (data.values.size() != system.variables.size()) {
    throw DimensionMismatch("dataset has " + std::to_string(data.values.size()) +
                            " variables, system has " + std::to_string(system.variables.size()));
  }
  const std::size_t n_cases = data.case_count();
  if (n_cases < 2) throw TooShort("dataset needs at least 2 test cases");
  auto pass_stream = [&](int var) {
    std::vector<bool> s(n_cases);
    for (std::size_t t = 0; t < n_cases; ++t) s[t] = system.variables[var].passes(data.values[var][t]);
    return s;
  };

  const std::size_t n = system.components.size();
  SystemDiagnosis out;
  out.models.resize(n);
  out.verdicts.resize(n);
  parallel_for(n, options.workers, [&](std::size_t c) {
    const Component& comp = system.components[c];
    if (comp.outputs.empty()) {
      throw InvalidArgument("component '" + comp.id + "' has no output to observe");
    }
    TestResults tests;
    for (int v : comp.outputs) tests.outputs.push_back(pass_stream(v));
    std::vector<std::vector<bool>> inputs;
    for (int v : comp.inputs) inputs.push_back(pass_stream(v));
    const Rates rates = estimate_rates(inputs.empty() ? std::vector<std::vector<bool>>{std::vector<bool>(n_cases, true)}
                                                      : inputs);
    ComponentModel cm = make_component_model(comp.id, rates, options.omega);
    Rng rng(derive_seed(options.seed, {c}));
    search_emission_matrix(cm, tests, inputs, options.search, rng);
    out.verdicts[c] = diagnose_component(cm, tests);
    out.models[c] = std::move(cm);
  });
  return out;
}

Json to_json(const ComponentModel& cm) {
  Json doc;
  doc["schema"] = 1;
  doc["component"] = cm.id;
  doc["omega"] = cm.omega;
  doc["alpha"] = cm.rates.alpha;
  doc["beta"] = cm.rates.beta;
  doc["gamma"] = cm.rates.gamma;
  doc["delta"] = cm.rates.delta;
  doc["M_I"] = cm.hmm.initial();
  doc["M_T"] = cm.hmm.transition();
  doc["M_E"] = cm.hmm.emission();
  doc["mu"] = cm.mu;
  doc["rho"] = cm.rho;
  return doc;
}

}  // namespace flare
