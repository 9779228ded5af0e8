#pragma once

// Closed-form results for a two-level system with energies -E, +E measured
// in the basis
//   |alpha_1> = a|E+> - b|E->,   |alpha_2> = b|E+> + a|E->,
// with a = sqrt(a2), b = sqrt(1 - a2) real, and rho0 = c1|E+><E+| + c2|E-><E-|.
// Every G(u) here has the form f(u)^T P g(u) where P is a mixture or power
// of the doubly stochastic transition matrix L(nu).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "qheat/disorder.hpp"
#include "qheat/heat_statistics.hpp"
#include "qheat/quantum_core.hpp"

namespace qheat::tls {

using Complex2 = Eigen::Vector2cd;

struct TlsParams {
  double e = 1.0;   // half splitting, Delta E = 2e
  double a2 = 0.5;  // |a|^2
  double c1 = 0.5;  // population of |E+>
  int m_count = 1;
  double beta = 1.0;
};

inline void validate(const TlsParams& p) {
  require(std::isfinite(p.e) && p.e > 0.0, "TLS half-splitting e must be > 0");
  require(p.a2 >= 0.0 && p.a2 <= 1.0, "a2 must lie in [0, 1]");
  require(p.c1 >= 0.0 && p.c1 <= 1.0, "c1 must lie in [0, 1]");
  require(p.m_count >= 1, "m_count must be >= 1");
  require(std::isfinite(p.beta) && p.beta >= 0.0, "beta must be finite and >= 0");
}

/// Thermal population of |E+>: e^{-beta E} / (e^{-beta E} + e^{beta E}).
inline double thermal_c1(double e, double beta) { return 1.0 / (1.0 + std::exp(2.0 * beta * e)); }

// ---------------------------------------------------------------------------
// Bridge to the general engine. Energy index 0 is E- = -e, index 1 is E+ = +e.

inline HermitianOperator hamiltonian(const TlsParams& p) {
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(0, 0) = -p.e;
  h(1, 1) = p.e;
  return spectral_decompose(h);
}

// Columns alpha_1, alpha_2 in (E-, E+) coordinates.
inline ComplexMatrix alpha_vectors(const TlsParams& p) {
  const double a = std::sqrt(p.a2);
  const double b = std::sqrt(1.0 - p.a2);
  ComplexMatrix v(2, 2);
  v << -b, a,
        a, b;
  return v;
}

inline MeasurementBasis measurement_basis(const TlsParams& p) { return MeasurementBasis::from_vectors(alpha_vectors(p), {1.0, 2.0}); }

inline DensityMatrix initial_state(const TlsParams& p, const HermitianOperator& h) {
  const double pops[] = {1.0 - p.c1, p.c1};
  return diagonal_state(h, pops);
}

inline ProtocolConfig make_config(const TlsParams& p, const WaitingTimeModel& model, std::uint64_t seed = 0) {
  validate(p);
  HermitianOperator h = hamiltonian(p);
  DensityMatrix rho0 = initial_state(p, h);
  return ProtocolConfig{std::move(h), measurement_basis(p), std::move(rho0), MeasurementCount{p.m_count}, model, p.beta, seed};
}

// ---------------------------------------------------------------------------
// Transition matrix

/// nu(tau) = |<alpha_2|U(tau)|alpha_1>|^2, evaluated from the matrix element.
inline double nu_of_tau(const TlsParams& p, double tau) {
  require(tau >= 0.0, "waiting time must be >= 0");
  const ComplexMatrix alpha = alpha_vectors(p);
  const ComplexMatrix u = propagator(hamiltonian(p), tau);
  return std::norm(alpha.col(1).dot(u * alpha.col(0)));
}

/// [[1 - nu, nu], [nu, 1 - nu]]; eigenvalues 1 (uniform vector) and 1 - 2 nu.
struct TransitionMatrix2 {
  double nu = 0.0;

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d l;
    l << 1.0 - nu, nu, nu, 1.0 - nu;
    return l;
  }
  double contraction() const { return 1.0 - 2.0 * nu; }

  // L^k = J/2 + (1 - 2 nu)^k K/2 with J = [[1,1],[1,1]], K = [[1,-1],[-1,1]].
  Eigen::Matrix2d power(int k) const { return spectral_power(std::pow(contraction(), k)); }

  static Eigen::Matrix2d spectral_power(double lambda_k) {
    Eigen::Matrix2d out;
    const double s = 0.5 * (1.0 + lambda_k);
    const double t = 0.5 * (1.0 - lambda_k);
    out << s, t, t, s;
    return out;
  }
};

inline std::vector<double> nus(const TlsParams& p, const DiscreteWaitingDist& dist) {
  std::vector<double> out(dist.size());
  for (std::size_t j = 0; j < dist.size(); ++j) out[j] = nu_of_tau(p, dist.value(j));
  return out;
}

// (1 - 2 nu)^{M-1} averaged per the disorder model; the non-trivial
// eigenvalue of the effective transfer matrix P.
inline double averaged_contraction(const TlsParams& p, const WaitingTimeModel& model) {
  const int power = p.m_count - 1;
  if (const auto* f = std::get_if<Fixed>(&model)) return std::pow(1.0 - 2.0 * nu_of_tau(p, f->tau_bar), power);
  if (const auto* q = std::get_if<Quenched>(&model)) {
    const auto v = nus(p, q->dist);
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += q->dist.prob(j) * std::pow(1.0 - 2.0 * v[j], power);
    return s;
  }
  const auto& dist = std::get<Annealed>(model).dist;
  const auto v = nus(p, dist);
  double zeta = 0.0;  // sum_j p_j nu_j
  for (std::size_t j = 0; j < v.size(); ++j) zeta += dist.prob(j) * v[j];
  return std::pow(1.0 - 2.0 * zeta, power);
}

inline Eigen::Matrix2d transfer_matrix(const TlsParams& p, const WaitingTimeModel& model) {
  validate(p);
  return TransitionMatrix2::spectral_power(averaged_contraction(p, model));
}

// ---------------------------------------------------------------------------
// Characteristic function

// f_j(u) = <alpha_j| e^{iuH} |alpha_j>
inline Complex2 f_vector(const TlsParams& p, Complex u) {
  const Complex ep = std::exp(Complex(0.0, 1.0) * u * p.e);
  const Complex em = std::exp(Complex(0.0, -1.0) * u * p.e);
  const double b2 = 1.0 - p.a2;
  return Complex2(p.a2 * ep + b2 * em, p.a2 * em + b2 * ep);
}

// g_j(u) = <alpha_j| e^{-iuH} rho0 |alpha_j>
inline Complex2 g_vector(const TlsParams& p, Complex u) {
  const Complex ep = std::exp(Complex(0.0, 1.0) * u * p.e);
  const Complex em = std::exp(Complex(0.0, -1.0) * u * p.e);
  const double b2 = 1.0 - p.a2;
  const double c2 = 1.0 - p.c1;
  return Complex2(p.a2 * p.c1 * em + b2 * c2 * ep, p.a2 * c2 * ep + b2 * p.c1 * em);
}

// f^T P g without conjugation.
inline Complex sandwich(const Complex2& f, const Eigen::Matrix2d& transfer, const Complex2& g) {
  return f.cwiseProduct(transfer.cast<Complex>() * g).sum();
}

inline Complex g_model(const TlsParams& p, Complex u, const WaitingTimeModel& model) {
  return sandwich(f_vector(p, u), transfer_matrix(p, model), g_vector(p, u));
}

inline Complex g_fixed(const TlsParams& p, Complex u, double tau_bar) { return g_model(p, u, Fixed(tau_bar)); }
inline Complex g_quenched(const TlsParams& p, Complex u, const DiscreteWaitingDist& dist) { return g_model(p, u, Quenched{dist}); }

/// Annealed G through the collapsed mixed matrix (sum_j p_j L_j)^{M-1}.
inline Complex g_annealed(const TlsParams& p, Complex u, const DiscreteWaitingDist& dist) { return g_model(p, u, Annealed{dist}); }

/// Annealed G as the explicit multinomial sum over how often each waiting
/// time occurs among the M - 1 transitions, with plain matrix products.
/// For two atoms this is the binomial expansion.
inline Complex g_annealed_multinomial(const TlsParams& p, Complex u, const DiscreteWaitingDist& dist) {
  validate(p);
  const std::size_t d = dist.size();
  std::vector<Eigen::Matrix2d> ls(d);
  for (std::size_t j = 0; j < d; ++j) ls[j] = TransitionMatrix2{nu_of_tau(p, dist.value(j))}.matrix();
  const Complex2 f = f_vector(p, u);
  const Complex2 g = g_vector(p, u);
  const int total = p.m_count - 1;

  Complex acc = 0.0;
  std::vector<int> counts(d, 0);
  auto recurse = [&](auto&& self, std::size_t j, int remaining) -> void {
    if (j + 1 == d) {
      counts[j] = remaining;
      double coeff = std::tgamma(total + 1.0);
      Eigen::Matrix2d product = Eigen::Matrix2d::Identity();
      for (std::size_t i = 0; i < d; ++i) {
        coeff *= std::pow(dist.prob(i), counts[i]) / std::tgamma(counts[i] + 1.0);
        for (int r = 0; r < counts[i]; ++r) product = product * ls[i];
      }
      acc += coeff * sandwich(f, product, g);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[j] = c;
      self(self, j + 1, remaining - c);
    }
  };
  recurse(recurse, 0, total);
  return acc;
}

/// dG/dc1; G is affine in c1 so this is G(c1 = 1) - G(c1 = 0).
inline Complex slope_c1(TlsParams p, Complex u, const WaitingTimeModel& model) {
  p.c1 = 1.0;
  const Complex top = g_model(p, u, model);
  p.c1 = 0.0;
  return top - g_model(p, u, model);
}

// ---------------------------------------------------------------------------
// Mean quantum-heat

/// lambda(tau) = (1 - 2 a2)^2 (1 - 2 nu(tau))^{M-1}
inline double lambda_of_tau(const TlsParams& p, double tau) {
  return std::pow(1.0 - 2.0 * p.a2, 2) * std::pow(1.0 - 2.0 * nu_of_tau(p, tau), p.m_count - 1);
}

/// Disorder-averaged lambda: lambda(tau_bar), sum_j p_j lambda(tau_j), or
/// (1 - 2 a2)^2 [sum_j p_j (1 - 2 nu_j)]^{M-1}.
inline double lambda_avg(const TlsParams& p, const WaitingTimeModel& model) {
  validate(p);
  return std::pow(1.0 - 2.0 * p.a2, 2) * averaged_contraction(p, model);
}

/// phi = E (1 - lambda_avg); the mean heat at c1 = 0.
inline double phi(const TlsParams& p, const WaitingTimeModel& model) { return p.e * (1.0 - lambda_avg(p, model)); }

/// Mean quantum-heat -phi (2 c1 - 1).
inline double mean_heat(const TlsParams& p, const WaitingTimeModel& model) { return -phi(p, model) * (2.0 * p.c1 - 1.0); }

// ---------------------------------------------------------------------------
// M -> infinity

/// (1 + e^{2iuE})/2 - c1 sinh(2iuE); valid for 0 < a2 < 1.
inline Complex g_infinity(const TlsParams& p, Complex u) {
  const Complex x = Complex(0.0, 2.0) * u * p.e;
  return 0.5 * (1.0 + std::exp(x)) - p.c1 * std::sinh(x);
}

inline double mean_heat_infinity(const TlsParams& p) { return p.e * (1.0 - 2.0 * p.c1); }

/// G_inf rebuilt from the asymptotic mean heat:
/// [sinh(2iuE)/E <Q>_inf + cosh(2iuE) + 1] / 2.
inline Complex g_infinity_from_mean(const TlsParams& p, Complex u) {
  const Complex x = Complex(0.0, 2.0) * u * p.e;
  return 0.5 * (std::sinh(x) / p.e * mean_heat_infinity(p) + std::cosh(x) + 1.0);
}

/// Asymptotic dG/dc1 = -sinh(2iuE); sinh(2 beta E) at u = i beta. Zero when a2 is 0 or 1.
inline Complex asymptotic_slope_c1(const TlsParams& p, Complex u) {
  if (p.a2 == 0.0 || p.a2 == 1.0) return 0.0;
  return -std::sinh(Complex(0.0, 2.0) * u * p.e);
}

// ---------------------------------------------------------------------------
// Fixed total time comparisons

/// Number of measurements used by closed forms at fixed total time: round(T / <tau>), at least 1.
inline int measurements_for(double total_time, double mean_waiting_time) {
  require(total_time > 0.0 && mean_waiting_time > 0.0, "total time and mean waiting time must be > 0");
  return std::max(1, static_cast<int>(std::lround(total_time / mean_waiting_time)));
}

/// Two-atom law with p1 chosen so the mean equals target.
inline DiscreteWaitingDist dist_with_mean(const DiscreteWaitingDist& dist, double target) {
  require(dist.size() == 2, "mean matching needs a two-atom waiting-time law");
  const double lo = dist.min_value();
  const double hi = dist.max_value();
  if (!(target >= lo && target <= hi))
    fail(ErrorCode::UnreachableMean, "target mean " + std::to_string(target) + " outside [" + std::to_string(lo) + ", " +
                                         std::to_string(hi) + "]");
  const double p1 = std::clamp((target - dist.value(1)) / (dist.value(0) - dist.value(1)), 0.0, 1.0);
  return DiscreteWaitingDist::bimodal(dist.value(0), dist.value(1), p1);
}

/// Delta lambda = lambda(fixed at target) - lambda_avg(annealed), at matched
/// mean waiting time and M = round(T / target).
inline double delta_lambda(TlsParams p, const DiscreteWaitingDist& dist, double mean_tau_target, double total_time) {
  const DiscreteWaitingDist matched = dist_with_mean(dist, mean_tau_target);
  p.m_count = measurements_for(total_time, mean_tau_target);
  return lambda_avg(p, Fixed(mean_tau_target)) - lambda_avg(p, Annealed{matched});
}

/// Annealed phi after scaling both atoms by a common factor so that
/// Delta E <tau> = mean_tau_scale; M = round(T / <tau>).
inline double max_mean_heat_annealed(TlsParams p, const DiscreteWaitingDist& dist, double mean_tau_scale,
                                     double total_time = 5.0) {
  require(mean_tau_scale > 0.0, "mean_tau_scale must be > 0");
  const double target_mean = mean_tau_scale / (2.0 * p.e);
  const double factor = target_mean / mean_tau(dist);
  std::vector<double> scaled = dist.values();
  for (double& v : scaled) v *= factor;
  const DiscreteWaitingDist sd(scaled, dist.probs());
  p.m_count = measurements_for(total_time, target_mean);
  return phi(p, Annealed{sd});
}

// ---------------------------------------------------------------------------
// Derivatives

/// d^k f / du^k
inline Complex2 f_derivative(const TlsParams& p, int k, Complex u) {
  const Complex ip = std::pow(Complex(0.0, p.e), k);
  const Complex im = std::pow(Complex(0.0, -p.e), k);
  const Complex ep = std::exp(Complex(0.0, 1.0) * u * p.e);
  const Complex em = std::exp(Complex(0.0, -1.0) * u * p.e);
  const double b2 = 1.0 - p.a2;
  return Complex2(ip * p.a2 * ep + im * b2 * em, im * p.a2 * em + ip * b2 * ep);
}

/// d^l g / du^l
inline Complex2 g_derivative(const TlsParams& p, int l, Complex u) {
  const Complex ip = std::pow(Complex(0.0, p.e), l);
  const Complex im = std::pow(Complex(0.0, -p.e), l);
  const Complex ep = std::exp(Complex(0.0, 1.0) * u * p.e);
  const Complex em = std::exp(Complex(0.0, -1.0) * u * p.e);
  const double b2 = 1.0 - p.a2;
  const double c2 = 1.0 - p.c1;
  return Complex2(im * p.a2 * p.c1 * em + ip * b2 * c2 * ep, ip * p.a2 * c2 * ep + im * b2 * p.c1 * em);
}

/// d^n G / du^n by the Leibniz rule: sum_k C(n,k) f^(k)^T P g^(n-k).
inline Complex nth_derivative_g(const TlsParams& p, const WaitingTimeModel& model, int n, Complex u) {
  require(n >= 1 && n <= 4, "derivative order must be in 1..4");
  const Eigen::Matrix2d transfer = transfer_matrix(p, model);
  Complex acc = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    acc += binom * sandwich(f_derivative(p, k, u), transfer, g_derivative(p, n - k, u));
    binom = binom * (n - k) / (k + 1);
  }
  return acc;
}

}  // namespace qheat::tls
