#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flare/hmm.hpp"
#include "flare/rng.hpp"
#include "flare/system.hpp"

namespace flare {

// Hidden state and observation orders are fixed; everything indexes by them.
enum DiagState : int { kPIp = 0, kPIf = 1, kFIp = 2, kFIf = 3 };
enum Observation : int { kOp = 0, kOf = 1 };

inline bool input_passed(int state) { return state == kPIp || state == kFIp; }
inline bool component_faulty(int state) { return state == kFIp || state == kFIf; }

/// Input-status transition rates: pass->pass, pass->fail, fail->pass,
/// fail->fail.
struct Rates {
  double alpha = 0.25;
  double beta = 0.25;
  double gamma = 0.25;
  double delta = 0.25;
};

inline constexpr double kDefaultOmega = 0.5;

/// ((1-w)/2, (1-w)/2, w/2, w/2). Throws OutOfRange unless w is in [0,1].
std::vector<double> build_initial_matrix(double omega);

/// Rows for PI_p/FI_p follow (alpha, beta), rows for PI_f/FI_f follow
/// (gamma, delta), each split (1-w) healthy / w faulty. Throws OutOfRange for
/// w, InvalidArgument when the rates are negative or do not sum to 1, and
/// DegenerateRates when alpha+beta or gamma+delta is 0.
Matrix build_transition_matrix(const Rates& rates, double omega);

/// Adjacent-pair frequencies over all sequences. With `smooth`, every cell
/// gets +1 when the pass row or the fail row saw no pair at all. Throws
/// TooShort when there is no sequence or one is shorter than 2.
Rates estimate_rates(const std::vector<std::vector<bool>>& inputs, bool smooth = true);

/// Pass/fail per output stream and test case (true = pass).
struct TestResults {
  std::vector<std::vector<bool>> outputs;
};

/// Per test case: O_p iff every output stream passes. Throws TooShort for
/// fewer than 2 cases or no stream, LengthMismatch for ragged streams.
std::vector<int> observation_sequence(const TestResults& tests);

/// Positionwise AND of pass/fail streams; empty input means "always passed"
/// over `length` steps.
std::vector<bool> all_passed(const std::vector<std::vector<bool>>& streams, std::size_t length);

/// Fraction of positions where the sequences agree. Throws LengthMismatch.
double matching_level(const std::vector<bool>& derived, const std::vector<bool>& actual);

struct ComponentModel {
  std::string id;
  double omega = kDefaultOmega;
  Rates rates;
  Hmm hmm;
  bool searched = false;
  double mu = 0.0;
  double rho = 0.0;
};

/// Model with M_I and M_T from (omega, rates) and an uninformative M_E.
ComponentModel make_component_model(std::string id, const Rates& rates, double omega = kDefaultOmega);

void set_emission(ComponentModel& cm, const Matrix& emission);

/// Per-step geometric mean of P(obs | hmm), in [0,1].
double confidence_level(const ComponentModel& cm, const std::vector<int>& obs);

struct SearchOptions {
  double mu_min = 0.9;
  double rho_min = 0.5;
  int max_iter = 2000;
  // Constrained draws share one row between PI_f and FI_f and keep PI_p at
  // most as failure-prone as FI_p; free draws sample all four rows.
  bool constrained = true;
};

struct SearchResult {
  Matrix emission;
  double mu = 0.0;
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// One emission matrix proposal.
Matrix sample_emission(Rng& rng, bool constrained);

/// Monte-Carlo search over M_E. A candidate is scored by decoding the output
/// observations, reading the input status off the decoded states and
/// comparing it with `pred_outputs` (AND over streams) for mu; rho is the
/// confidence level. Stops at the first candidate meeting both thresholds;
/// otherwise keeps the best by (mu, rho). Writes the winner into `cm`.
SearchResult search_emission_matrix(ComponentModel& cm, const TestResults& tests,
                                    const std::vector<std::vector<bool>>& pred_outputs,
                                    const SearchOptions& options, Rng& rng);

enum class Status { Passed, Faulty };

const char* to_string(Status s);

struct DiagnosisVerdict {
  std::string component;
  Status status = Status::Passed;
  double mu = 0.0;
  double rho = 0.0;
  double faulty_fraction = 0.0;  // share of decoded states with a faulty component
  std::vector<int> states;
};

/// Decodes the output observations and takes the majority of the projected
/// component status (ties: Faulty). Throws MissingDiagnosis when the model
/// was never searched.
DiagnosisVerdict diagnose_component(const ComponentModel& cm, const TestResults& tests);

/// Suspect ordering: Faulty verdicts by (rho desc, mu desc, id), then Passed
/// ones by (faulty_fraction desc, mu asc, rho desc, id).
struct RankedComponent {
  std::size_t rank = 0;
  DiagnosisVerdict verdict;
};

/// Throws MissingDiagnosis when a component of `system` has no verdict.
std::vector<RankedComponent> rank_components(const ComponentSystem& system,
                                             const std::vector<DiagnosisVerdict>& verdicts);

struct DiagnosisOptions {
  double omega = kDefaultOmega;
  SearchOptions search;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct SystemDiagnosis {
  std::vector<ComponentModel> models;
  std::vector<DiagnosisVerdict> verdicts;  // same order as system.components
};

/// Diagnoses every component from the dataset values and range specs only;
/// failure probabilities and ground-truth flags are never read.
SystemDiagnosis diagnose_system(const ComponentSystem& system, const SimulatedDataset& data,
                                const DiagnosisOptions& options);

Json to_json(const ComponentModel& cm);

}  // namespace flare
