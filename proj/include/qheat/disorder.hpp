#pragma once

// Waiting-time disorder: fixed, quenched (one draw per sequence) and
// annealed (independent draw per step) protocols over a finite discrete
// waiting-time law, with samplers and exact enumeration of realizations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qheat/error.hpp"
#include "qheat/rng.hpp"

namespace qheat {

/// Discrete waiting-time law: strictly positive distinct atoms tau^(j) with probabilities p_j.
class DiscreteWaitingDist {
 public:
  DiscreteWaitingDist(std::vector<double> values, std::vector<double> probs)
      : values_(std::move(values)), probs_(std::move(probs)) {
    require(!values_.empty(), "waiting-time distribution needs at least one atom");
    require(values_.size() == probs_.size(), "waiting-time values and probabilities differ in length");
    double total = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) {
      require(std::isfinite(values_[j]) && values_[j] > 0.0, "waiting times must be finite and > 0");
      require(std::isfinite(probs_[j]) && probs_[j] >= 0.0, "waiting-time probabilities must be >= 0");
      for (std::size_t l = 0; l < j; ++l) require(values_[l] != values_[j], "waiting-time atoms must be distinct");
      total += probs_[j];
    }
    require(std::abs(total - 1.0) < 1e-12, "waiting-time probabilities sum to " + std::to_string(total) + ", expected 1");
  }

  static DiscreteWaitingDist single(double tau) { return DiscreteWaitingDist({tau}, {1.0}); }
  static DiscreteWaitingDist bimodal(double tau1, double tau2, double p1) {
    return DiscreteWaitingDist({tau1, tau2}, {p1, 1.0 - p1});
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }
  double value(std::size_t j) const { return values_[j]; }
  double prob(std::size_t j) const { return probs_[j]; }
  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

  double sample(Rng& rng) const { return values_[rng.discrete(probs_)]; }

 private:
  std::vector<double> values_;
  std::vector<double> probs_;
};

inline double mean_tau(const DiscreteWaitingDist& dist) {
  double s = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) s += dist.prob(j) * dist.value(j);
  return s;
}

inline double second_moment_tau(const DiscreteWaitingDist& dist) {
  double s = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) s += dist.prob(j) * dist.value(j) * dist.value(j);
  return s;
}

struct Fixed {
  explicit Fixed(double tau) : tau_bar(tau) {
    require(std::isfinite(tau) && tau > 0.0, "fixed waiting time must be finite and > 0");
  }
  double tau_bar;
};

struct Quenched {
  DiscreteWaitingDist dist;
};

struct Annealed {
  DiscreteWaitingDist dist;
};

using WaitingTimeModel = std::variant<Fixed, Quenched, Annealed>;

inline std::string model_name(const WaitingTimeModel& model) {
  switch (model.index()) {
    case 0: return "fixed";
    case 1: return "quenched";
    default: return "annealed";
  }
}

inline double min_waiting_time(const WaitingTimeModel& model) {
  if (const auto* f = std::get_if<Fixed>(&model)) return f->tau_bar;
  if (const auto* q = std::get_if<Quenched>(&model)) return q->dist.min_value();
  return std::get<Annealed>(model).dist.min_value();
}

// Support size d_tau; 1 for the fixed protocol.
inline std::size_t support_size(const WaitingTimeModel& model) {
  if (std::holds_alternative<Fixed>(model)) return 1;
  if (const auto* q = std::get_if<Quenched>(&model)) return q->dist.size();
  return std::get<Annealed>(model).dist.size();
}

struct SequenceRealization {
  std::vector<double> taus;
  double weight = 1.0;
};

inline std::vector<double> sample_taus(const WaitingTimeModel& model, int m_count, Rng& rng) {
  require(m_count >= 1, "number of measurements must be >= 1");
  const auto m = static_cast<std::size_t>(m_count);
  if (const auto* f = std::get_if<Fixed>(&model)) return std::vector<double>(m, f->tau_bar);
  if (const auto* q = std::get_if<Quenched>(&model)) return std::vector<double>(m, q->dist.sample(rng));
  const auto& dist = std::get<Annealed>(model).dist;
  std::vector<double> taus(m);
  for (auto& tau : taus) tau = dist.sample(rng);
  return taus;
}

inline constexpr std::uint64_t default_realization_cap = 1'000'000;

/// All waiting-time sequences of length m_count with their probabilities.
inline std::vector<SequenceRealization> enumerate_realizations(const WaitingTimeModel& model, int m_count,
                                                               std::uint64_t cap = default_realization_cap) {
  require(m_count >= 1, "number of measurements must be >= 1");
  const auto m = static_cast<std::size_t>(m_count);
  if (const auto* f = std::get_if<Fixed>(&model)) return {{std::vector<double>(m, f->tau_bar), 1.0}};
  if (const auto* q = std::get_if<Quenched>(&model)) {
    std::vector<SequenceRealization> out;
    for (std::size_t j = 0; j < q->dist.size(); ++j)
      if (q->dist.prob(j) > 0.0) out.push_back({std::vector<double>(m, q->dist.value(j)), q->dist.prob(j)});
    return out;
  }
  const auto& dist = std::get<Annealed>(model).dist;
  const double count = std::pow(static_cast<double>(dist.size()), static_cast<double>(m));
  if (count > static_cast<double>(cap))
    fail(ErrorCode::EnumerationTooLarge, std::to_string(dist.size()) + "^" + std::to_string(m) +
                                             " annealed realizations exceed the cap of " + std::to_string(cap));

  std::vector<SequenceRealization> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> digits(m, 0);
  while (true) {
    SequenceRealization r{std::vector<double>(m), 1.0};
    for (std::size_t i = 0; i < m; ++i) {
      r.taus[i] = dist.value(digits[i]);
      r.weight *= dist.prob(digits[i]);
    }
    if (r.weight > 0.0) out.push_back(std::move(r));
    // odometer, last position fastest
    std::size_t pos = m;
    while (pos > 0 && ++digits[pos - 1] == dist.size()) digits[--pos] = 0;
    if (pos == 0) break;
  }
  return out;
}

// Partial sums up to total_time are retained; the relative slack keeps
// exact divisors (5 x 1.0 in T = 5) on the inclusive side despite rounding.
inline bool fits_in(double partial_sum, double total_time) { return partial_sum <= total_time * (1.0 + 1e-12); }

struct FixedTimeDraw {
  int m_count = 0;
  std::vector<double> taus;
};

/// Draws waiting times until the next one would overshoot total_time.
/// M = 0 is possible when the first draw already exceeds the total time.
inline FixedTimeDraw sample_fixed_total_time(const WaitingTimeModel& model, double total_time, Rng& rng) {
  require(std::isfinite(total_time) && total_time > 0.0, "total time must be finite and > 0");
  require(min_waiting_time(model) > 0.0, "minimum waiting time must be > 0");
  FixedTimeDraw out;
  double elapsed = 0.0;
  const Quenched* quenched = std::get_if<Quenched>(&model);
  const double quenched_tau = quenched ? quenched->dist.sample(rng) : 0.0;
  while (true) {
    double tau = 0.0;
    if (const auto* f = std::get_if<Fixed>(&model)) tau = f->tau_bar;
    else if (quenched) tau = quenched_tau;
    else tau = std::get<Annealed>(model).dist.sample(rng);
    if (!fits_in(elapsed + tau, total_time)) break;
    elapsed += tau;
    out.taus.push_back(tau);
  }
  out.m_count = static_cast<int>(out.taus.size());
  return out;
}

/// Exact law of the retained waiting-time prefix under a fixed total time.
/// Realizations have variable length; weights sum to one.
inline std::vector<SequenceRealization> enumerate_fixed_total_time(const WaitingTimeModel& model, double total_time,
                                                                   std::uint64_t cap = default_realization_cap) {
  require(std::isfinite(total_time) && total_time > 0.0, "total time must be finite and > 0");
  auto repeat = [total_time](double tau) {
    std::vector<double> taus;
    double elapsed = 0.0;
    while (fits_in(elapsed + tau, total_time)) {
      elapsed += tau;
      taus.push_back(tau);
    }
    return taus;
  };
  if (const auto* f = std::get_if<Fixed>(&model)) return {{repeat(f->tau_bar), 1.0}};
  if (const auto* q = std::get_if<Quenched>(&model)) {
    std::vector<SequenceRealization> out;
    for (std::size_t j = 0; j < q->dist.size(); ++j)
      if (q->dist.prob(j) > 0.0) out.push_back({repeat(q->dist.value(j)), q->dist.prob(j)});
    return out;
  }
  const auto& dist = std::get<Annealed>(model).dist;
  std::vector<SequenceRealization> out;
  std::vector<double> prefix;
  // Each node of the draw tree terminates with the probability of overshooting.
  auto visit = [&](auto&& self, double elapsed, double weight) -> void {
    double stop = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
      if (dist.prob(j) == 0.0) continue;
      if (fits_in(elapsed + dist.value(j), total_time)) {
        prefix.push_back(dist.value(j));
        self(self, elapsed + dist.value(j), weight * dist.prob(j));
        prefix.pop_back();
      } else {
        stop += dist.prob(j);
      }
    }
    if (stop > 0.0) {
      if (out.size() >= cap)
        fail(ErrorCode::EnumerationTooLarge, "fixed-total-time realizations exceed the cap of " + std::to_string(cap));
      out.push_back({prefix, weight * stop});
    }
  };
  visit(visit, 0.0, 1.0);
  return out;
}

}  // namespace qheat
