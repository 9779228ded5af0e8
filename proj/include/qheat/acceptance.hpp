#pragma once

// The acceptance suite behind `qheat verify` and the acceptance test binary.
// Every tolerance and grid is pinned here; a criterion that cannot be met
// reports FAIL with the measured numbers rather than a relaxed bound.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "qheat/commands.hpp"
#include "qheat/config.hpp"
#include "qheat/heat_statistics.hpp"
#include "qheat/numeric.hpp"
#include "qheat/tls.hpp"

namespace qheat::acceptance {

inline constexpr std::uint64_t default_seed = 20240611;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = default_seed;
  unsigned threads = 1;
  std::set<int> only;      // empty = all
  std::string executable;  // qheat binary for the out-of-process determinism check, optional
};

namespace detail {

inline std::string fmt(double x, const char* spec = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }

inline int uniform_int(std::mt19937_64& gen, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }

inline WaitingTimeModel random_model(std::mt19937_64& gen, int kind) {
  if (kind == 0) return Fixed(uniform(gen, 0.05, 3.0));
  double t1 = uniform(gen, 0.05, 3.0), t2 = uniform(gen, 0.05, 3.0);
  while (std::abs(t1 - t2) < 1e-3) t2 = uniform(gen, 0.05, 3.0);
  const auto dist = DiscreteWaitingDist::bimodal(t1, t2, uniform(gen, 0.1, 0.9));
  if (kind == 1) return Quenched{dist};
  return Annealed{dist};
}

struct TlsCase {
  tls::TlsParams p;
  WaitingTimeModel model;
};

// Random thermal TLS configurations; models cycle Fixed, Quenched, Annealed.
inline std::vector<TlsCase> random_thermal_tls(std::uint64_t seed, int count) {
  std::mt19937_64 gen(derive_seed(seed, 1));
  std::vector<TlsCase> out;
  for (int i = 0; i < count; ++i) {
    tls::TlsParams p{uniform(gen, 0.5, 1.5), uniform(gen, 0.0, 1.0), 0.0, uniform_int(gen, 1, 8), uniform(gen, 0.2, 1.5)};
    p.c1 = tls::thermal_c1(p.e, p.beta);
    out.push_back({p, random_model(gen, i % 3)});
  }
  return out;
}

inline ComplexMatrix random_unitary(std::size_t d, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  ComplexMatrix z(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = Complex(normal(gen), normal(gen));
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  return qr.householderQ() * ComplexMatrix::Identity(z.rows(), z.cols());
}

// d-level system with a random Hermitian H (level spacing >= 0.1), a random
// orthonormal measurement basis and thermal or random diagonal/full state.
inline ProtocolConfig random_system(std::mt19937_64& gen, std::size_t d, int m_max, bool thermal, bool coherent) {
  std::vector<double> levels;
  while (true) {
    levels.clear();
    for (std::size_t i = 0; i < d; ++i) levels.push_back(uniform(gen, -2.0, 2.0));
    std::sort(levels.begin(), levels.end());
    bool ok = true;
    for (std::size_t i = 1; i < d; ++i) ok = ok && levels[i] - levels[i - 1] > 0.1;
    if (ok) break;
  }
  const ComplexMatrix v = random_unitary(d, gen);
  Eigen::VectorXcd diag(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) diag(static_cast<Eigen::Index>(i)) = levels[i];
  ComplexMatrix hm = v * diag.asDiagonal() * v.adjoint();
  hm = 0.5 * (hm + hm.adjoint());
  HermitianOperator h = spectral_decompose(hm);
  std::vector<double> outcomes(d);
  for (std::size_t i = 0; i < d; ++i) outcomes[i] = static_cast<double>(i + 1);
  MeasurementBasis basis = MeasurementBasis::from_vectors(random_unitary(d, gen), outcomes);
  const double beta = uniform(gen, 0.2, 1.5);
  const DensityMatrix rho0 = [&] {
    if (thermal) return thermal_state(h, beta);
    if (coherent) {
      ComplexMatrix a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      std::normal_distribution<double> normal;
      for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = Complex(normal(gen), normal(gen));
      ComplexMatrix rho = a * a.adjoint();
      rho /= rho.trace();
      return DensityMatrix(0.5 * (rho + rho.adjoint()));
    }
    std::vector<double> pops(d);
    double total = 0.0;
    for (auto& x : pops) total += (x = uniform(gen, 0.05, 1.0));
    for (auto& x : pops) x /= total;
    return diagonal_state(h, pops);
  }();
  const int m_count = uniform_int(gen, 1, m_max);
  return ProtocolConfig{std::move(h), std::move(basis), rho0, MeasurementCount{m_count}, random_model(gen, uniform_int(gen, 0, 2)),
                        beta, 0};
}

// Figure 1/2 parameter sets: E = beta = 1, M = 5.
inline const DiscreteWaitingDist& fig2_dist() {
  static const DiscreteWaitingDist d = DiscreteWaitingDist::bimodal(0.01, 3.0, 0.3);
  return d;
}

inline std::vector<std::pair<std::string, WaitingTimeModel>> figure_models() {
  return {{"fixed", Fixed(1.0)}, {"quenched", Quenched{fig2_dist()}}, {"annealed", Annealed{fig2_dist()}}};
}

inline int sign(double x) { return (x > 0.0) - (x < 0.0); }

// --- criteria ---------------------------------------------------------------

inline CriterionResult jarzynski(const AcceptanceOptions& o) {
  CriterionResult r{1, "Jarzynski identity"};
  const auto cases = random_thermal_tls(o.seed, 120);
  double worst_exact = 0.0, worst_z = 0.0;
  int mc_fail = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto c = tls::make_config(cases[i].p, cases[i].model, derive_seed(o.seed, 100 + i));
    worst_exact = std::max(worst_exact, std::abs(characteristic_function(c, Complex(0.0, c.beta)) - 1.0));
    const auto mc = jarzynski_mc(c, 10'000, o.threads);
    const double z = mc.std_error > 0.0 ? std::abs(mc.estimate - 1.0) / mc.std_error : (mc.estimate == 1.0 ? 0.0 : 1e300);
    worst_z = std::max(worst_z, z);
    mc_fail += z > 3.0;
  }
  r.pass = worst_exact < 1e-10 && mc_fail == 0;
  r.detail = std::to_string(cases.size()) + " thermal TLS configs, max |G(i beta) - 1| = " + fmt(worst_exact) +
             " (tol 1e-10); MC N=1e4 max |z| = " + fmt(worst_z) + ", " + std::to_string(mc_fail) + " outside 3 SE";
  return r;
}

inline CriterionResult unitality(const AcceptanceOptions& o) {
  CriterionResult r{2, "Unitality"};
  double worst = 0.0;
  std::size_t n = 0;
  for (const auto& tc : random_thermal_tls(o.seed, 120)) {
    worst = std::max(worst, unitality_check(tls::make_config(tc.p, tc.model)));
    ++n;
  }
  std::mt19937_64 gen(derive_seed(o.seed, 2));
  for (std::size_t d : {3u, 4u})
    for (int i = 0; i < 20; ++i) {
      worst = std::max(worst, unitality_check(random_system(gen, d, 4, true, false)));
      ++n;
    }
  r.pass = worst < 1e-10;
  r.detail = std::to_string(n) + " configs (120 TLS, 20 each at d=3 and d=4), max residual " + fmt(worst) + " (tol 1e-10)";
  return r;
}

inline CriterionResult triple_agreement(const AcceptanceOptions& o) {
  CriterionResult r{3, "Triple agreement"};
  double worst_exact = 0.0, worst_z = 0.0;
  int points = 0, mc_fail = 0;
  std::uint64_t k = 0;
  for (const auto& [name, model] : figure_models())
    for (double a : {0.0, 0.1, 0.5})
      for (double c1 : {0.0, 0.5, 1.0}) {
        const tls::TlsParams p{1.0, a * a, c1, 5, 1.0};
        const auto c = tls::make_config(p, model, derive_seed(o.seed, 300 + k++));
        for (Complex u : {Complex(0.0, 1.0), Complex(0.3, 0.0), Complex(1.7, 0.0)})
          worst_exact = std::max(worst_exact, std::abs(tls::g_model(p, u, model) - characteristic_function(c, u)));
        const double analytic = tls::g_model(p, Complex(0.0, 1.0), model).real();
        const auto mc = jarzynski_mc(c, 100'000, o.threads);
        const double z = mc.std_error > 0.0 ? std::abs(mc.estimate - analytic) / mc.std_error
                                            : (std::abs(mc.estimate - analytic) < 1e-12 ? 0.0 : 1e300);
        worst_z = std::max(worst_z, z);
        mc_fail += z > 4.0;
        ++points;
      }
  r.pass = worst_exact < 1e-10 && mc_fail == 0;
  r.detail = std::to_string(points) + " points (fixed/quenched/annealed x a x c1): max |analytic - exact| = " + fmt(worst_exact) +
             " (tol 1e-10); MC N=1e5 max |z| = " + fmt(worst_z) + ", " + std::to_string(mc_fail) + " outside 4 sigma";
  return r;
}

inline CriterionResult fig1(const AcceptanceOptions&) {
  CriterionResult r{4, "Fig. 1 reproduction"};
  const double thermal = tls::thermal_c1(1.0, 1.0);
  const Complex ib(0.0, 1.0);
  double affine = 0.0, crossing = 0.0, flat = 0.0;
  for (double a : {0.0, 0.1, 0.5}) {
    auto g = [&](double c1) { return tls::g_fixed(tls::TlsParams{1.0, a * a, c1, 5, 1.0}, ib, 1.0).real(); };
    auto engine = [&](double c1) {
      return characteristic_function(tls::make_config(tls::TlsParams{1.0, a * a, c1, 5, 1.0}, Fixed(1.0)), ib).real();
    };
    const double g0 = g(0.0), g1 = g(1.0);
    for (int i = 0; i <= 20; ++i) {
      const double c1 = i / 20.0;
      affine = std::max(affine, std::abs(g(c1) - (g0 + c1 * (g1 - g0))));
      affine = std::max(affine, std::abs(engine(c1) - (g0 + c1 * (g1 - g0))));
      if (a == 0.0) flat = std::max(flat, std::abs(g(c1) - 1.0));
    }
    crossing = std::max({crossing, std::abs(g(thermal) - 1.0), std::abs(engine(thermal) - 1.0)});
  }
  r.pass = affine < 1e-10 && crossing < 1e-10 && flat < 1e-10;
  r.detail = "affine residual " + fmt(affine) + ", |G - 1| at thermal c1 = " + fmt(thermal, "%.4f") + ": " + fmt(crossing) +
             ", a=0 line max |G - 1| = " + fmt(flat) + " (tol 1e-10)";
  return r;
}

inline CriterionResult mean_heat_structure(const AcceptanceOptions&) {
  CriterionResult r{5, "Mean-heat structure"};
  double zeros = 0.0, ordering = 0.0, max_gap = 0.0, engine = 0.0;
  bool phi_bounded = true;
  int cells = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int m : {1, 2, 5, 10, 20}) {
        const double a2 = (i + 0.5) / 10.0, p1 = (j + 0.5) / 10.0;
        const auto dist = DiscreteWaitingDist::bimodal(0.01, 3.0, p1);
        const Quenched qu{dist};
        const Annealed an{dist};
        for (const WaitingTimeModel& model : {WaitingTimeModel(qu), WaitingTimeModel(an)}) {
          zeros = std::max(zeros, std::abs(tls::mean_heat(tls::TlsParams{1.0, a2, 0.5, m, 1.0}, model)));
          for (double edge : {0.0, 1.0}) zeros = std::max(zeros, std::abs(tls::mean_heat(tls::TlsParams{1.0, edge, 0.3, m, 1.0}, model)));
          // mean heat is affine and decreasing in c1: largest at c1 = 0, where it equals phi
          const tls::TlsParams p{1.0, a2, 0.0, m, 1.0};
          const double phi = tls::phi(p, model);
          double best = -1e300;
          for (int k = 0; k <= 10; ++k) best = std::max(best, tls::mean_heat(tls::TlsParams{1.0, a2, k / 10.0, m, 1.0}, model));
          max_gap = std::max({max_gap, std::abs(best - phi), std::abs(tls::mean_heat(p, model) - phi)});
          phi_bounded = phi_bounded && phi <= p.e + 1e-12;
          if (m <= 5 && i % 3 == 0 && j % 3 == 0)
            engine = std::max(engine, std::abs(moment(tls::make_config(tls::TlsParams{1.0, a2, 0.2, m, 1.0}, model), 1).direct -
                                              tls::mean_heat(tls::TlsParams{1.0, a2, 0.2, m, 1.0}, model)));
        }
        const tls::TlsParams p{1.0, a2, 0.0, m, 1.0};
        ordering = std::max(ordering, std::abs(tls::mean_heat(p, qu)) - std::abs(tls::mean_heat(p, an)));
        ++cells;
      }
  r.pass = zeros <= 1e-12 && ordering <= 1e-12 && max_gap <= 1e-12 && phi_bounded && engine <= 1e-12;
  r.detail = std::to_string(cells) + " grid cells: max |Q| at c1=1/2 or a2 in {0,1} = " + fmt(zeros) +
             ", max(|Q_qu| - |Q_an|) = " + fmt(ordering) + ", |max_c1 Q - phi| = " + fmt(max_gap) +
             (phi_bounded ? ", phi <= E" : ", phi > E somewhere") + ", engine vs closed form " + fmt(engine) + " (tol 1e-12)";
  return r;
}

inline CriterionResult asymptotic_slope(const AcceptanceOptions&) {
  CriterionResult r{6, "M -> infinity discontinuity"};
  const Complex ib(0.0, 1.0);
  const Quenched qu{fig2_dist()};
  const Annealed an{fig2_dist()};
  auto gap = [&](double a2, int m, const WaitingTimeModel& model) {
    const tls::TlsParams p{1.0, a2, 0.0, m, 1.0};
    return tls::slope_c1(p, ib, model).real() - tls::asymptotic_slope_c1(p, ib).real();
  };
  const double err = std::abs(gap(0.2, 100, qu));
  double zero_line = 0.0;
  for (int m : {1, 2, 10, 100, 1000})
    for (const WaitingTimeModel& model : {WaitingTimeModel(qu), WaitingTimeModel(an), WaitingTimeModel(Fixed(1.0))})
      zero_line = std::max(zero_line, std::abs(tls::slope_c1(tls::TlsParams{1.0, 0.0, 0.0, m, 1.0}, ib, model).real()));
  r.pass = err < 1e-2 && zero_line < 1e-12;
  r.detail = "a2=0.2, M=100 quenched: |slope - asymptotic slope| = " + fmt(err) + " (tol 1e-2); a2=0 max |slope| over M = " +
             fmt(zero_line);
  const double sinh2 = std::sinh(2.0);
  r.info.push_back("asymptotic slope sinh(2 beta E) = " + fmt(sinh2, "%.6f") + ", M=100 quenched slope = " +
                   fmt(tls::slope_c1(tls::TlsParams{1.0, 0.2, 0.0, 100, 1.0}, ib, qu).real(), "%.6f") +
                   ", annealed gap = " + fmt(std::abs(gap(0.2, 100, an))));
  double rate = 0.0;
  for (int m : {2, 10, 100, 1000})
    for (const WaitingTimeModel& model : {WaitingTimeModel(qu), WaitingTimeModel(an)}) {
      const tls::TlsParams p{1.0, 0.2, 0.0, m, 1.0};
      rate = std::max(rate, std::abs(gap(0.2, m, model) + tls::lambda_avg(p, model) * sinh2));
    }
  r.info.push_back("convergence-rate identity slope_M - slope_inf = -lambda_avg sinh(2 beta E): max deviation " + fmt(rate) +
                   " over M in {2,10,100,1000}");
  int lo = 100, hi = 100;
  while (std::abs(gap(0.2, hi, qu)) >= 1e-2 && hi < (1 << 24)) lo = hi, hi *= 2;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (std::abs(gap(0.2, mid, qu)) < 1e-2 ? hi : lo) = mid;
  }
  r.info.push_back("quenched gap first drops below 1e-2 at M = " + std::to_string(hi));
  return r;
}

inline CriterionResult small_tau(const AcceptanceOptions&) {
  CriterionResult r{7, "Small-tau quenched criterion"};
  int cases = 0, agree = 0, agree_flipped = 0;
  for (int i = 1; i <= 10; ++i)
    for (int j = i + 1; j <= 10; ++j)
      for (int k = 1; k <= 9; ++k)
        for (int m : {2, 3, 5, 10})
          for (double a2 : {0.1, 0.25, 0.4}) {
            // tau * Delta E <= 0.05 with Delta E = 2
            const auto dist = DiscreteWaitingDist::bimodal(0.0025 * i, 0.0025 * j, k / 10.0);
            const double tau_bar = mean_tau(dist);
            const tls::TlsParams p{1.0, a2, 0.9, m, 1.0};
            const double diff = std::abs(tls::mean_heat(p, Quenched{dist})) - std::abs(tls::mean_heat(p, Fixed(tau_bar)));
            if (std::abs(diff) <= 1e-14) continue;
            const double predicted = tau_bar * tau_bar - second_moment_tau(dist);
            ++cases;
            agree += sign(diff) == sign(predicted);
            agree_flipped += sign(diff) == -sign(predicted);
          }
  r.pass = cases > 0 && agree == cases;
  r.detail = std::to_string(agree) + "/" + std::to_string(cases) + " non-degenerate cases agree with sign(tau_bar^2 - <tau^2>) (required 100%)";
  r.info.push_back("agreement with sign(<tau^2> - tau_bar^2): " + std::to_string(agree_flipped) + "/" + std::to_string(cases));
  return r;
}

inline CriterionResult resonance(const AcceptanceOptions&) {
  CriterionResult r{8, "Fig. 4 resonance"};
  const tls::TlsParams p{0.5, 0.2, 0.0, 1, 1.0};
  double worst_resonance = 0.0;
  std::string values;
  for (double tau : {0.1, 0.5})
    for (int k = 1; k <= 3; ++k) {
      const double v = tls::max_mean_heat_annealed(p, DiscreteWaitingDist::single(tau), k * std::numbers::pi, 5.0);
      worst_resonance = std::max(worst_resonance, std::abs(v));
      if (tau == 0.1) values += (k > 1 ? ", " : "") + fmt(v, "%.4f");
    }
  const auto mixed = DiscreteWaitingDist::bimodal(0.1, 0.5, 0.5);
  double scan_min = 1e300;
  for (int i = 0; i <= 4000; ++i) {
    const double x = 0.1 + (4.0 * std::numbers::pi - 0.1) * i / 4000.0;
    scan_min = std::min(scan_min, tls::max_mean_heat_annealed(p, mixed, x, 5.0));
  }
  r.pass = worst_resonance < 1e-9 && scan_min > 1e-4;
  r.detail = "p1 in {0,1}: max |Q_max| at Delta E <tau> = pi, 2pi, 3pi is " + fmt(worst_resonance) + " (tol 1e-9); p1=0.5 scan min " +
             fmt(scan_min) + " (required > 1e-4)";
  r.info.push_back("Q_max at pi, 2pi, 3pi: " + values + "; floor at sin(E tau)=0 is E(1 - (1-2 a2)^2) = " +
                   fmt(p.e * (1.0 - std::pow(1.0 - 2.0 * p.a2, 2)), "%.4f"));
  return r;
}

inline CriterionResult moments(const AcceptanceOptions& o) {
  CriterionResult r{9, "Moment consistency"};
  std::mt19937_64 gen(derive_seed(o.seed, 9));
  std::vector<ProtocolConfig> configs;
  for (int i = 0; i < 35; ++i) {
    tls::TlsParams p{uniform(gen, 0.5, 1.5), uniform(gen, 0.0, 1.0), uniform(gen, 0.0, 1.0), uniform_int(gen, 1, 5), uniform(gen, 0.2, 1.5)};
    configs.push_back(tls::make_config(p, random_model(gen, i % 3)));
  }
  for (int i = 0; i < 15; ++i) configs.push_back(random_system(gen, 3, 3, false, i % 2 == 1));
  double worst = 0.0, worst_fd[5] = {0, 0, 0, 0, 0};
  int failures = 0;
  for (const auto& c : configs) {
    const HeatDistribution dist = exact_distribution(c);
    const auto g = [&](Complex u) { return characteristic_function(c, u); };
    for (int order = 1; order <= 4; ++order) {
      const double m = dist.moment(order);
      const double scale = std::max(1.0, std::abs(m));
      try {
        const MomentEstimate est = moment(c, order);
        worst = std::max(worst, std::abs(est.from_characteristic - est.direct) / scale);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::MomentMismatch) throw;
        ++failures;
      }
      const Complex fd = std::pow(Complex(0.0, -1.0), order) * central_difference(g, order, Complex(0.0, 0.0));
      worst_fd[order] = std::max(worst_fd[order], std::abs(fd.real() - m) / scale);
    }
  }
  r.pass = failures == 0 && worst <= 1e-6;
  r.detail = std::to_string(configs.size()) + " configs (35 TLS, 15 d=3), orders 1-4: max |G-derivative moment - distribution moment| / max(1, |m|) = " +
             fmt(worst) + " (tol 1e-6)";
  r.info.push_back("derivatives by a 64-point Cauchy contour of radius 1/max(1, spread); real-axis central differences (h=1e-3, one "
                   "Richardson step) reach " + fmt(worst_fd[1]) + ", " + fmt(worst_fd[2]) + ", " + fmt(worst_fd[3]) + ", " +
                   fmt(worst_fd[4]) + " for orders 1-4");
  return r;
}

inline std::string determinism_config(std::uint64_t seed) {
  return R"({
  "system": {"type": "tls", "E": 1.0, "a2": 0.25},
  "initial_state": {"type": "c1", "c1": 0.3},
  "protocol": {"measurements": 5},
  "waiting_times": {"model": "annealed", "values": [0.01, 3.0], "probs": [0.3, 0.7]},
  "beta": 1.0,
  "trajectories": 20000,
  "sweep": {"parameter": "c1", "values": [0.0, 0.5, 1.0]},
  "seed": )" + std::to_string(seed) + "\n}\n";
}

inline CriterionResult determinism(const AcceptanceOptions& o) {
  CriterionResult r{10, "Determinism"};
  const cli::Json doc = cli::parse_json_text(determinism_config(o.seed), "determinism config");
  const std::string a = cli::cmd_simulate(cli::parse_spec(doc, {std::nullopt, 1u})).render();
  const std::string b = cli::cmd_simulate(cli::parse_spec(doc, {std::nullopt, 1u})).render();
  const std::string c = cli::cmd_simulate(cli::parse_spec(doc, {std::nullopt, 4u})).render();
  bool ok = a == b && a == c;
  r.detail = "in-process simulate, repeated and with 1 vs 4 threads: " + std::string(ok ? "byte-identical" : "outputs differ") + " (" +
             std::to_string(a.size()) + " bytes)";
  if (!o.executable.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("qheat_determinism_" + std::to_string(o.seed) + "_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << determinism_config(o.seed);
    auto run = [&](const std::string& out, int threads) {
      const std::string cmd = "\"" + o.executable + "\" simulate --config \"" + (dir / "config.json").string() + "\" --threads " +
                              std::to_string(threads) + " --out \"" + (dir / out).string() + "\"";
      return std::system(cmd.c_str()) == 0;
    };
    const bool ran = run("a.csv", 1) && run("b.csv", 1) && run("c.csv", 3);
    const std::string fa = ran ? cli::read_file((dir / "a.csv").string()) : "";
    const bool same = ran && fa == cli::read_file((dir / "b.csv").string()) && fa == cli::read_file((dir / "c.csv").string()) && fa == a;
    r.detail += "; qheat executable, 3 runs: " + std::string(!ran ? "failed to run" : same ? "byte-identical" : "outputs differ");
    ok = ok && same;
    fs::remove_all(dir);
  }
  r.pass = ok;
  return r;
}

}  // namespace detail

struct Criterion {
  int id;
  double budget_seconds;  // 0 = no runtime bound
  std::function<CriterionResult(const AcceptanceOptions&)> run;
};

inline std::vector<Criterion> criteria() {
  return {{1, 60.0, detail::jarzynski},      {2, 10.0, detail::unitality},          {3, 300.0, detail::triple_agreement},
          {4, 0.0, detail::fig1},            {5, 30.0, detail::mean_heat_structure}, {6, 0.0, detail::asymptotic_slope},
          {7, 10.0, detail::small_tau},      {8, 0.0, detail::resonance},           {9, 30.0, detail::moments},
          {10, 0.0, detail::determinism}};
}

inline std::string format_line(const CriterionResult& r) {
  std::string out = std::string(r.pass ? "[PASS]" : "[FAIL]") + " criterion " + std::to_string(r.id) + " (" + r.name + "): " + r.detail +
                    " (" + detail::fmt(r.seconds, "%.2f") + " s)\n";
  for (const auto& line : r.info) out += "    info: " + line + "\n";
  return out;
}

/// Runs the selected criteria in order, reporting each through `on_result` as it finishes.
inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& o,
                                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
  std::vector<CriterionResult> out;
  for (const auto& c : criteria()) {
    if (!o.only.empty() && !o.only.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = c.run(o);
    } catch (const std::exception& e) {
      r = CriterionResult{c.id, "criterion " + std::to_string(c.id), false, std::string("error: ") + e.what()};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && r.seconds > c.budget_seconds) {
      r.pass = false;
      r.detail += "; runtime over budget " + detail::fmt(c.budget_seconds, "%.0f") + " s";
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qheat::acceptance
