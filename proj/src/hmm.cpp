#include "flare/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "flare/error.hpp"

namespace flare {

namespace {

constexpr double kTolerance = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_row(const std::vector<double>& row, const std::string& what) {
  double sum = 0.0;
  for (double x : row) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
      throw NotADistribution(what + " has an entry outside [0,1]");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kTolerance) {
    throw NotADistribution(what + " sums to " + std::to_string(sum));
  }
}

void check_obs(const Hmm& h, std::span<const int> obs) {
  if (obs.empty()) throw BadObservationIndex("observation sequence is empty");
  for (int o : obs) {
    if (o < 0 || static_cast<std::size_t>(o) >= h.n_obs()) {
      throw BadObservationIndex("observation index " + std::to_string(o) + " outside [0, " +
                                std::to_string(h.n_obs()) + ")");
    }
  }
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

Hmm::Hmm(std::vector<double> initial, Matrix transition, Matrix emission)
    : initial_(std::move(initial)), transition_(std::move(transition)), emission_(std::move(emission)) {
  const std::size_t n = initial_.size();
  if (n == 0) throw DimensionMismatch("HMM needs at least one state");
  if (transition_.size() != n || emission_.size() != n) {
    throw DimensionMismatch("transition and emission need one row per state");
  }
  if (emission_[0].empty()) throw DimensionMismatch("HMM needs at least one observation symbol");
  check_row(initial_, "initial distribution");
  for (std::size_t i = 0; i < n; ++i) {
    if (transition_[i].size() != n) throw DimensionMismatch("transition matrix must be N x N");
    if (emission_[i].size() != emission_[0].size()) {
      throw DimensionMismatch("emission rows must have equal length");
    }
    check_row(transition_[i], "transition row " + std::to_string(i));
    check_row(emission_[i], "emission row " + std::to_string(i));
  }
}

double sequence_probability(const Hmm& h, std::span<const int> obs) {
  if (obs.size() <= kLinearForwardMaxLength) return sequence_probability_linear(h, obs);
  return std::exp(sequence_log_probability(h, obs));
}

double sequence_probability_linear(const Hmm& h, std::span<const int> obs) {
  check_obs(h, obs);
  const std::size_t n = h.n_states();
  const auto& a = h.transition();
  const auto& b = h.emission();
  std::vector<double> alpha(n);
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = h.initial()[i] * b[i][obs[0]];
  for (std::size_t t = 1; t < obs.size(); ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += alpha[i] * a[i][j];
      next[j] = s * b[j][obs[t]];
    }
    alpha.swap(next);
  }
  double p = 0.0;
  for (double x : alpha) p += x;
  return std::clamp(p, 0.0, 1.0);
}

double sequence_log_probability(const Hmm& h, std::span<const int> obs) {
  check_obs(h, obs);
  const std::size_t n = h.n_states();
  Matrix log_a(n, std::vector<double>(n));
  Matrix log_b(n, std::vector<double>(h.n_obs()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) log_a[i][j] = safe_log(h.transition()[i][j]);
    for (std::size_t k = 0; k < h.n_obs(); ++k) log_b[i][k] = safe_log(h.emission()[i][k]);
  }
  std::vector<double> alpha(n);
  std::vector<double> next(n);
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = safe_log(h.initial()[i]) + log_b[i][obs[0]];
  for (std::size_t t = 1; t < obs.size(); ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) terms[i] = alpha[i] + log_a[i][j];
      next[j] = log_sum_exp(terms) + log_b[j][obs[t]];
    }
    alpha.swap(next);
  }
  return std::min(log_sum_exp(alpha), 0.0);
}

std::vector<int> most_likely_states(const Hmm& h, std::span<const int> obs) {
  check_obs(h, obs);
  const std::size_t n = h.n_states();
  const std::size_t len = obs.size();
  std::vector<double> delta(n);
  std::vector<double> next(n);
  std::vector<std::vector<int>> back(len, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    delta[i] = safe_log(h.initial()[i]) + safe_log(h.emission()[i][obs[0]]);
  }
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = delta[i] + safe_log(h.transition()[i][j]);
        if (v > best) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      next[j] = best + safe_log(h.emission()[j][obs[t]]);
      back[t][j] = arg;
    }
    delta.swap(next);
  }
  int state = 0;
  double best = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (delta[i] > best) {
      best = delta[i];
      state = static_cast<int>(i);
    }
  }
  if (best == kNegInf) {
    throw ZeroProbabilitySequence("no state path explains the observation sequence");
  }
  std::vector<int> path(len);
  for (std::size_t t = len; t-- > 0;) {
    path[t] = state;
    state = back[t][static_cast<std::size_t>(state)];
  }
  return path;
}

double path_probability(const Hmm& h, std::span<const int> states, std::span<const int> obs) {
  check_obs(h, obs);
  if (states.size() != obs.size()) throw LengthMismatch("state path and observations differ in length");
  for (int s : states) {
    if (s < 0 || static_cast<std::size_t>(s) >= h.n_states()) {
      throw InvalidArgument("state index " + std::to_string(s) + " out of range");
    }
  }
  double p = h.initial()[states[0]] * h.emission()[states[0]][obs[0]];
  for (std::size_t t = 1; t < obs.size(); ++t) {
    p *= h.transition()[states[t - 1]][states[t]] * h.emission()[states[t]][obs[t]];
  }
  return p;
}

Matrix random_row_stochastic(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw InvalidArgument("random_row_stochastic needs rows, cols >= 1");
  std::exponential_distribution<double> expo(1.0);
  Matrix m(rows, std::vector<double>(cols));
  for (auto& row : m) {
    double sum = 0.0;
    for (double& x : row) {
      x = expo(rng);
      sum += x;
    }
    // A draw of exactly zero everywhere is possible only in theory; fall back
    // to the uniform row rather than dividing by zero.
    if (sum <= 0.0) {
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(cols));
      continue;
    }
    for (double& x : row) x /= sum;
  }
  return m;
}

Json to_json(const Hmm& h) {
  Json doc;
  doc["initial"] = h.initial();
  doc["transition"] = h.transition();
  doc["emission"] = h.emission();
  return doc;
}

}  // namespace flare
