#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flare/rng.hpp"
#include "flare/tpn.hpp"

namespace flare {

using Matrix = std::vector<std::vector<double>>;

/// Discrete HMM with N hidden states and M observation symbols.
class Hmm {
 public:
  Hmm() = default;

  // Throws DimensionMismatch on inconsistent shapes and NotADistribution when
  // an entry leaves [0,1] or a row is off 1 by more than 1e-9.
  Hmm(std::vector<double> initial, Matrix transition, Matrix emission);

  std::size_t n_states() const { return initial_.size(); }
  std::size_t n_obs() const { return emission_.empty() ? 0 : emission_[0].size(); }
  const std::vector<double>& initial() const { return initial_; }
  const Matrix& transition() const { return transition_; }
  const Matrix& emission() const { return emission_; }

 private:
  std::vector<double> initial_;
  Matrix transition_;
  Matrix emission_;
};

/// Lengths up to this use the linear forward recursion, longer ones log space.
inline constexpr std::size_t kLinearForwardMaxLength = 64;

/// P(obs | h). Throws BadObservationIndex for an empty sequence or an index
/// outside [0, M).
double sequence_probability(const Hmm& h, std::span<const int> obs);

/// Forward recursion on plain probabilities.
double sequence_probability_linear(const Hmm& h, std::span<const int> obs);

/// ln P(obs | h) via log-sum-exp; -inf when the sequence is impossible.
double sequence_log_probability(const Hmm& h, std::span<const int> obs);

/// Viterbi path. Among equally likely predecessors (and final states) the
/// lowest state index wins. Throws ZeroProbabilitySequence when every path
/// has probability 0.
std::vector<int> most_likely_states(const Hmm& h, std::span<const int> obs);

/// Probability of one explicit state path jointly with obs.
double path_probability(const Hmm& h, std::span<const int> states, std::span<const int> obs);

/// Rows drawn uniformly from the simplex (normalized exponentials).
Matrix random_row_stochastic(std::size_t rows, std::size_t cols, Rng& rng);

Json to_json(const Hmm& h);

}  // namespace flare
