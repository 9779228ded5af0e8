#pragma once

// Two-point measurement engine: Monte Carlo trajectories, exact enumeration
// over waiting-time realizations and outcome sequences, the quantum-heat
// distribution P(Q), its characteristic function G(u), the Jarzynski
// estimator and moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <thread>
#include <variant>
#include <vector>

#include "qheat/disorder.hpp"
#include "qheat/numeric.hpp"
#include "qheat/quantum_core.hpp"
#include "qheat/rng.hpp"

namespace qheat {

struct MeasurementCount {
  int m_count = 1;
};

struct TotalTime {
  double total_time = 1.0;
};

using Schedule = std::variant<MeasurementCount, TotalTime>;

struct ProtocolConfig {
  HermitianOperator h;
  MeasurementBasis basis;
  DensityMatrix rho0;
  Schedule schedule;
  WaitingTimeModel model;
  double beta = 1.0;
  std::uint64_t seed = 0;
};

inline void validate(const ProtocolConfig& c) {
  require(c.basis.dim() == c.h.dim(), "measurement basis and Hamiltonian dimensions differ");
  require(c.rho0.dim() == c.h.dim(), "initial state and Hamiltonian dimensions differ");
  require(std::isfinite(c.beta) && c.beta >= 0.0, "beta must be finite and >= 0");
  if (const auto* mc = std::get_if<MeasurementCount>(&c.schedule)) require(mc->m_count >= 1, "m_count must be >= 1");
  else require(std::get<TotalTime>(c.schedule).total_time > 0.0, "total_time must be > 0");
}

struct HeatRecord {
  std::size_t n = 0;
  std::vector<std::size_t> ks;
  std::vector<double> taus;
  std::size_t m = 0;
  double q = 0.0;
};

struct HeatAtom {
  double q = 0.0;
  double prob = 0.0;
};

enum class DistributionKind { Exact, Empirical };

struct HeatDistribution {
  std::vector<HeatAtom> atoms;  // ascending in q
  DistributionKind kind = DistributionKind::Exact;
  std::uint64_t n_samples = 0;

  double total_probability() const {
    CompensatedSum s;
    for (const auto& a : atoms) s.add(a.prob);
    return s.value();
  }
  double moment(int order) const {
    CompensatedSum s;
    for (const auto& a : atoms) s.add(a.prob * std::pow(a.q, order));
    return s.value();
  }
  Complex fourier(Complex u) const {
    Complex s = 0.0;
    for (const auto& a : atoms) s += a.prob * std::exp(Complex(0.0, 1.0) * u * a.q);
    return s;
  }
  // Probability mass at q (0 when q is not an atom).
  double prob_at(double q, double tolerance = 1e-12) const {
    for (const auto& a : atoms)
      if (std::abs(a.q - q) <= tolerance) return a.prob;
    return 0.0;
  }
};

inline constexpr double atom_merge_tolerance = 1e-12;

/// Joint probability table P(n, m) of initial/final energy indices -> atoms of Q = E_m - E_n.
inline HeatDistribution distribution_from_table(const HermitianOperator& h, std::span<const double> table,
                                                DistributionKind kind, std::uint64_t n_samples = 0) {
  const std::size_t d = h.dim();
  std::vector<HeatAtom> raw;
  raw.reserve(d * d);
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m < d; ++m) raw.push_back({h.energy(m) - h.energy(n), table[n * d + m]});
  std::stable_sort(raw.begin(), raw.end(), [](const HeatAtom& a, const HeatAtom& b) { return a.q < b.q; });
  HeatDistribution out{{}, kind, n_samples};
  for (const auto& a : raw) {
    if (!out.atoms.empty() && std::abs(a.q - out.atoms.back().q) <= atom_merge_tolerance) out.atoms.back().prob += a.prob;
    else out.atoms.push_back(a);
  }
  std::erase_if(out.atoms, [](const HeatAtom& a) { return a.prob <= 0.0; });
  return out;
}

inline double total_variation(const HeatDistribution& a, const HeatDistribution& b) {
  std::map<double, double> diff;
  auto key = [&](double q) {
    for (const auto& [k, v] : diff)
      if (std::abs(k - q) <= atom_merge_tolerance) return k;
    return q;
  };
  for (const auto& x : a.atoms) diff[key(x.q)] += x.prob;
  for (const auto& x : b.atoms) diff[key(x.q)] -= x.prob;
  double tv = 0.0;
  for (const auto& [q, v] : diff) tv += std::abs(v);
  return 0.5 * tv;
}

// ---------------------------------------------------------------------------
// Exact enumeration

inline constexpr std::uint64_t default_term_cap = 10'000'000;

inline std::vector<SequenceRealization> realizations(const ProtocolConfig& c,
                                                     std::uint64_t cap = default_realization_cap) {
  if (const auto* mc = std::get_if<MeasurementCount>(&c.schedule)) return enumerate_realizations(c.model, mc->m_count, cap);
  return enumerate_fixed_total_time(c.model, std::get<TotalTime>(c.schedule).total_time, cap);
}

namespace detail {

inline void check_term_count(const std::vector<SequenceRealization>& rs, std::size_t outcomes, std::uint64_t cap) {
  double terms = 0.0;
  for (const auto& r : rs) terms += std::pow(static_cast<double>(outcomes), static_cast<double>(r.taus.size()));
  if (terms > static_cast<double>(cap))
    fail(ErrorCode::EnumerationTooLarge, "exact enumeration needs " + std::to_string(static_cast<long double>(terms)) +
                                             " terms, cap is " + std::to_string(cap) +
                                             "; reduce M, the outcome count or the waiting-time support");
}

/// Visits V(k, tau) for every outcome sequence k of one waiting-time
/// realization, reusing prefix products. `projectors` and `propagate`
/// must be expressed in the same coordinates.
template <typename Propagate, typename Leaf>
void for_each_outcome_sequence(const std::vector<ComplexMatrix>& projectors, std::span<const double> taus,
                               Propagate&& propagate, Leaf&& leaf) {
  const auto d = projectors.front().rows();
  std::map<double, std::vector<ComplexMatrix>> steps;  // tau -> Pi_k U(tau)
  for (double tau : taus) {
    if (steps.contains(tau)) continue;
    const ComplexMatrix u = propagate(tau);
    auto& s = steps[tau];
    for (const auto& p : projectors) s.push_back(p * u);
  }
  std::vector<ComplexMatrix> prefix(taus.size() + 1);
  prefix[0] = ComplexMatrix::Identity(d, d);
  auto visit = [&](auto&& self, std::size_t depth) -> void {
    if (depth == taus.size()) {
      leaf(prefix[depth]);
      return;
    }
    const auto& s = steps.at(taus[depth]);
    for (std::size_t k = 0; k < s.size(); ++k) {
      prefix[depth + 1].noalias() = s[k] * prefix[depth];
      self(self, depth + 1);
    }
  };
  visit(visit, 0);
}

// Energy-eigenbasis coordinates: H diagonal, projectors rotated.
struct EnergyFrame {
  explicit EnergyFrame(const ProtocolConfig& c) : energies(c.h.eigenvalues()) {
    const ComplexMatrix rotation = c.h.eigenvectors().adjoint();
    for (std::size_t k = 0; k < c.basis.size(); ++k) {
      const ComplexVector w = rotation * c.basis.vector(k);
      projectors.push_back(w * w.adjoint());
    }
  }
  ComplexMatrix propagator(double tau) const {
    ComplexVector phases(energies.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(Complex(0.0, -energies(i) * tau));
    return phases.asDiagonal();
  }

  RealVector energies;
  std::vector<ComplexMatrix> projectors;
};

}  // namespace detail

/// Joint table P(n, m) = sum_r w_r sum_k p_n |<E_m|V(k, tau_r)|E_n>|^2 for a given set of realizations.
inline std::vector<double> transition_table(const ProtocolConfig& c, const std::vector<SequenceRealization>& rs) {
  const detail::EnergyFrame frame(c);
  const std::size_t d = c.h.dim();
  const std::vector<double> pn = first_measurement_probs(c.rho0, c.h);
  std::vector<double> table(d * d, 0.0);
  for (const auto& r : rs) {
    std::vector<double> local(d * d, 0.0);
    detail::for_each_outcome_sequence(frame.projectors, r.taus, [&](double tau) { return frame.propagator(tau); },
                                      [&](const ComplexMatrix& v) {
                                        for (std::size_t n = 0; n < d; ++n)
                                          for (std::size_t m = 0; m < d; ++m)
                                            local[n * d + m] += std::norm(v(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)));
                                      });
    for (std::size_t n = 0; n < d; ++n)
      for (std::size_t m = 0; m < d; ++m) table[n * d + m] += r.weight * pn[n] * local[n * d + m];
  }
  return table;
}

/// P(Q) for one fixed waiting-time sequence.
inline HeatDistribution exact_distribution_for_taus(const ProtocolConfig& c, std::span<const double> taus) {
  const std::vector<SequenceRealization> single{{std::vector<double>(taus.begin(), taus.end()), 1.0}};
  detail::check_term_count(single, c.basis.size(), default_term_cap);
  return distribution_from_table(c.h, transition_table(c, single), DistributionKind::Exact);
}

inline HeatDistribution exact_distribution(const ProtocolConfig& c, std::uint64_t cap = default_term_cap) {
  validate(c);
  const auto rs = realizations(c);
  detail::check_term_count(rs, c.basis.size(), cap);
  return distribution_from_table(c.h, transition_table(c, rs), DistributionKind::Exact);
}

/// sum_n Pi_n rho0 Pi_n: the state left by the first energy measurement.
inline ComplexMatrix dephased_state(const DensityMatrix& rho0, const HermitianOperator& h) {
  const auto pn = first_measurement_probs(rho0, h);
  ComplexVector d(static_cast<Eigen::Index>(h.dim()));
  for (std::size_t n = 0; n < h.dim(); ++n) d(static_cast<Eigen::Index>(n)) = pn[n];
  return h.eigenvectors() * d.asDiagonal() * h.eigenvectors().adjoint();
}

/// G(u) = sum_r w_r sum_k Tr[e^{iuH} V e^{-iuH} rho0 V^dagger], evaluated for several u in one pass.
/// rho0 enters through its energy-diagonal part; coherences between energy
/// levels are erased by the first measurement and do not reach P(Q).
inline std::vector<Complex> characteristic_function(const ProtocolConfig& c, std::span<const Complex> us,
                                                    std::uint64_t cap = default_term_cap) {
  validate(c);
  const auto rs = realizations(c);
  detail::check_term_count(rs, c.basis.size(), cap);
  const ComplexMatrix rho = dephased_state(c.rho0, c.h);
  std::vector<ComplexMatrix> left, right;  // e^{iuH}, e^{-iuH} rho
  for (Complex u : us) {
    left.push_back(exp_iu_h(c.h, u));
    right.push_back(exp_iu_h(c.h, -u) * rho);
  }
  std::vector<ComplexMatrix> projectors;
  for (std::size_t k = 0; k < c.basis.size(); ++k) projectors.push_back(c.basis.projector(k));

  std::vector<Complex> g(us.size(), Complex(0.0, 0.0));
  for (const auto& r : rs) {
    std::vector<Complex> local(us.size(), Complex(0.0, 0.0));
    detail::for_each_outcome_sequence(projectors, r.taus, [&](double tau) { return propagator(c.h, tau); },
                                      [&](const ComplexMatrix& v) {
                                        const ComplexMatrix vdag = v.adjoint();
                                        for (std::size_t i = 0; i < us.size(); ++i)
                                          local[i] += (left[i] * v * right[i] * vdag).trace();
                                      });
    for (std::size_t i = 0; i < us.size(); ++i) g[i] += r.weight * local[i];
  }
  return g;
}

inline Complex characteristic_function(const ProtocolConfig& c, Complex u, std::uint64_t cap = default_term_cap) {
  const Complex us[] = {u};
  return characteristic_function(c, us, cap).front();
}

/// Frobenius norm of sum_r w_r sum_k V V^dagger - I.
inline double unitality_check(const ProtocolConfig& c, std::uint64_t cap = default_term_cap) {
  validate(c);
  const auto rs = realizations(c);
  detail::check_term_count(rs, c.basis.size(), cap);
  std::vector<ComplexMatrix> projectors;
  for (std::size_t k = 0; k < c.basis.size(); ++k) projectors.push_back(c.basis.projector(k));
  const auto d = static_cast<Eigen::Index>(c.h.dim());
  ComplexMatrix channel = ComplexMatrix::Zero(d, d);
  for (const auto& r : rs) {
    ComplexMatrix local = ComplexMatrix::Zero(d, d);
    detail::for_each_outcome_sequence(projectors, r.taus, [&](double tau) { return propagator(c.h, tau); },
                                      [&](const ComplexMatrix& v) { local += v * v.adjoint(); });
    channel += r.weight * local;
  }
  return (channel - ComplexMatrix::Identity(d, d)).norm();
}

struct MomentEstimate {
  double direct = 0.0;             // sum_atoms prob q^n
  double from_characteristic = 0.0;  // (-i)^n d^n G(0)
};

/// Moment of order 1..4 by two routes. The derivative route integrates G on
/// a circle around u = 0 (see contour_derivatives); MomentMismatch is raised
/// when the routes disagree beyond 1e-6 max(1, |moment|).
inline MomentEstimate moment(const ProtocolConfig& c, int order, std::uint64_t cap = default_term_cap) {
  require(order >= 1 && order <= 4, "moment order must be in 1..4");
  const HeatDistribution dist = exact_distribution(c, cap);
  const double spread = c.h.eigenvalues().maxCoeff() - c.h.eigenvalues().minCoeff();
  const double radius = 1.0 / std::max(1.0, spread);
  constexpr int points = 64;
  std::vector<Complex> us(points);
  for (int j = 0; j < points; ++j) us[static_cast<std::size_t>(j)] = std::polar(radius, 2.0 * std::numbers::pi * j / points);
  const std::vector<Complex> g = characteristic_function(c, us, cap);
  std::size_t idx = 0;
  const auto derivs = contour_derivatives([&](Complex) { return g[idx++]; }, order, radius, points);

  MomentEstimate out;
  out.direct = dist.moment(order);
  out.from_characteristic = (std::pow(Complex(0.0, -1.0), order) * derivs[static_cast<std::size_t>(order)]).real();
  const double tolerance = 1e-6 * std::max(1.0, std::abs(out.direct));
  if (std::abs(out.direct - out.from_characteristic) > tolerance)
    fail(ErrorCode::MomentMismatch, "order " + std::to_string(order) + ": distribution " + std::to_string(out.direct) +
                                        " vs characteristic " + std::to_string(out.from_characteristic));
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo trajectories

/// Precomputed energy-frame data for sampling trajectories of one config.
class TrajectorySampler {
 public:
  explicit TrajectorySampler(const ProtocolConfig& c)
      : config_(c), energies_(c.h.eigenvalues()), pn_(first_measurement_probs(c.rho0, c.h)) {
    validate(c);
    vectors_ = c.h.eigenvectors().adjoint() * c.basis.vectors();
  }

  HeatRecord run(Rng& rng) const {
    const auto d = static_cast<Eigen::Index>(energies_.size());
    HeatRecord rec;
    rec.n = rng.discrete(pn_);
    if (const auto* mc = std::get_if<MeasurementCount>(&config_.schedule)) rec.taus = sample_taus(config_.model, mc->m_count, rng);
    else rec.taus = sample_fixed_total_time(config_.model, std::get<TotalTime>(config_.schedule).total_time, rng).taus;

    ComplexVector psi = ComplexVector::Zero(d);
    psi(static_cast<Eigen::Index>(rec.n)) = 1.0;
    std::vector<double> born(static_cast<std::size_t>(vectors_.cols()));
    rec.ks.reserve(rec.taus.size());
    for (double tau : rec.taus) {
      for (Eigen::Index i = 0; i < d; ++i) psi(i) *= std::exp(Complex(0.0, -energies_(i) * tau));
      for (Eigen::Index k = 0; k < vectors_.cols(); ++k) born[static_cast<std::size_t>(k)] = std::norm(vectors_.col(k).dot(psi));
      const std::size_t k = rng.discrete(born);
      rec.ks.push_back(k);
      psi = vectors_.col(static_cast<Eigen::Index>(k));
    }
    std::vector<double> final_probs(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) final_probs[static_cast<std::size_t>(i)] = std::norm(psi(i));
    rec.m = rng.discrete(final_probs);
    rec.q = config_.h.energy(rec.m) - config_.h.energy(rec.n);
    return rec;
  }

  const ProtocolConfig& config() const { return config_; }

 private:
  const ProtocolConfig& config_;
  RealVector energies_;
  std::vector<double> pn_;
  ComplexMatrix vectors_;  // basis vectors in energy coordinates
};

inline HeatRecord run_trajectory(const ProtocolConfig& c, Rng& rng) { return TrajectorySampler(c).run(rng); }

/// Integer (n, m) counts; merging batches is order-independent.
struct TransitionCounts {
  std::size_t dim = 0;
  std::vector<std::uint64_t> counts;  // n * dim + m
  std::uint64_t total = 0;

  explicit TransitionCounts(std::size_t d = 0) : dim(d), counts(d * d, 0) {}

  void add(const HeatRecord& r) {
    ++counts[r.n * dim + r.m];
    ++total;
  }
  void merge(const TransitionCounts& other) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    total += other.total;
  }
};

/// Trajectories [begin, end), trajectory i seeded from (config.seed, i).
inline TransitionCounts simulate_range(const ProtocolConfig& c, std::uint64_t begin, std::uint64_t end) {
  const TrajectorySampler sampler(c);
  TransitionCounts out(c.h.dim());
  for (std::uint64_t i = begin; i < end; ++i) {
    Rng rng = Rng::for_index(c.seed, i);
    out.add(sampler.run(rng));
  }
  return out;
}

inline TransitionCounts simulate(const ProtocolConfig& c, std::uint64_t n_traj, unsigned threads = 1) {
  validate(c);
  threads = std::max(1u, threads);
  if (threads == 1 || n_traj < threads) return simulate_range(c, 0, n_traj);
  std::vector<TransitionCounts> parts(threads);
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t begin = n_traj * t / threads;
    const std::uint64_t end = n_traj * (t + 1) / threads;
    workers.emplace_back([&c, &parts, t, begin, end] { parts[t] = simulate_range(c, begin, end); });
  }
  for (auto& w : workers) w.join();
  TransitionCounts out(c.h.dim());
  for (const auto& p : parts) out.merge(p);
  return out;
}

inline HeatDistribution empirical_distribution(const ProtocolConfig& c, const TransitionCounts& counts) {
  std::vector<double> table(counts.counts.size());
  for (std::size_t i = 0; i < table.size(); ++i)
    table[i] = static_cast<double>(counts.counts[i]) / static_cast<double>(counts.total);
  return distribution_from_table(c.h, table, DistributionKind::Empirical, counts.total);
}

struct SampleMean {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Sample mean of f(q) over the counted trajectories; std error sqrt(s^2 / N), s^2 with N - 1.
template <typename Fn>
SampleMean sample_mean(const ProtocolConfig& c, const TransitionCounts& counts, Fn&& f) {
  const std::size_t d = counts.dim;
  const auto total = static_cast<double>(counts.total);
  CompensatedSum s;
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m < d; ++m)
      s.add(static_cast<double>(counts.counts[n * d + m]) * f(c.h.energy(m) - c.h.energy(n)));
  const double mean = s.value() / total;
  CompensatedSum v;
  for (std::size_t n = 0; n < d; ++n)
    for (std::size_t m = 0; m < d; ++m) {
      const double dev = f(c.h.energy(m) - c.h.energy(n)) - mean;
      v.add(static_cast<double>(counts.counts[n * d + m]) * dev * dev);
    }
  const double var = counts.total > 1 ? v.value() / (total - 1.0) : 0.0;
  return {mean, std::sqrt(var / total)};
}

/// (1/N) sum_j exp(-beta q_j) with its standard error.
inline SampleMean jarzynski_mc(const ProtocolConfig& c, std::uint64_t n_traj, unsigned threads = 1) {
  require(n_traj >= 2, "Jarzynski estimate needs at least two trajectories");
  const TransitionCounts counts = simulate(c, n_traj, threads);
  return sample_mean(c, counts, [beta = c.beta](double q) { return std::exp(-beta * q); });
}

}  // namespace qheat
