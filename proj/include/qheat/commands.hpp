#pragma once

// simulate / exact / figure commands. Each returns a Report; the front end
// decides where it is written.

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qheat/config.hpp"
#include "qheat/heat_statistics.hpp"
#include "qheat/result_table.hpp"
#include "qheat/tls.hpp"

namespace qheat::cli {

namespace detail {

inline std::string number_text(double x) { return format_number(x); }

inline std::string schedule_text(const Schedule& s) {
  if (const auto* mc = std::get_if<MeasurementCount>(&s)) return "measurements=" + std::to_string(mc->m_count);
  return "total_time=" + number_text(std::get<TotalTime>(s).total_time);
}

inline std::string model_text(const WaitingTimeModel& m) {
  if (const auto* f = std::get_if<Fixed>(&m)) return "fixed tau=" + number_text(f->tau_bar);
  const auto& dist = std::holds_alternative<Quenched>(m) ? std::get<Quenched>(m).dist : std::get<Annealed>(m).dist;
  std::string out = model_name(m) + " values=[";
  for (std::size_t j = 0; j < dist.size(); ++j) out += (j ? "," : "") + number_text(dist.value(j));
  out += "] probs=[";
  for (std::size_t j = 0; j < dist.size(); ++j) out += (j ? "," : "") + number_text(dist.prob(j));
  return out + "]";
}

inline void common_metadata(Report& r, const std::string& command, const ExperimentSpec& s) {
  const std::string config = s.effective.dump();
  r.meta("qheat_version", std::string(version));
  r.meta("command", command);
  r.meta("seed", std::to_string(s.seed));
  r.meta("config_hash", fnv1a_hex(config));
  r.meta("system", s.system.kind == SystemKind::Tls ? "tls E=" + number_text(s.system.e) + " a2=" + number_text(s.system.a2)
                                                   : "matrix dim=" + std::to_string(s.system.hamiltonian.rows()));
  r.meta("schedule", schedule_text(s.schedule));
  r.meta("model", model_text(s.model));
  r.meta("beta", number_text(s.beta));
  if (s.sweep) r.meta("sweep", s.sweep->parameter + " (" + std::to_string(s.sweep->values.size()) + " points)");
  r.meta("config", config);
}

inline std::vector<std::optional<double>> sweep_points(const ExperimentSpec& s) {
  if (!s.sweep) return {std::nullopt};
  std::vector<std::optional<double>> out;
  for (double v : s.sweep->values) out.emplace_back(v);
  return out;
}

inline std::vector<std::string> with_sweep(const ExperimentSpec& s, std::vector<std::string> columns) {
  if (s.sweep) columns.insert(columns.begin(), s.sweep->parameter);
  return columns;
}

inline std::vector<double> with_sweep(std::optional<double> v, std::vector<double> row) {
  if (v) row.insert(row.begin(), *v);
  return row;
}

inline bool closed_form_applies(const ExperimentSpec& s, const ProtocolConfig& c) {
  if (s.system.kind != SystemKind::Tls || !std::holds_alternative<MeasurementCount>(c.schedule)) return false;
  // closed forms assume an energy-diagonal initial state
  const ComplexMatrix off = c.rho0.matrix() - dephased_state(c.rho0, c.h);
  return off.cwiseAbs().maxCoeff() < 1e-12;
}

}  // namespace detail

/// Monte Carlo: per-atom histogram, Jarzynski estimate and first two moments with standard errors.
inline Report cmd_simulate(const ExperimentSpec& s) {
  Report r;
  detail::common_metadata(r, "simulate", s);
  r.meta("trajectories", std::to_string(s.trajectories));
  auto& summary = r.table("summary", detail::with_sweep(s, {"trajectories", "jarzynski", "jarzynski_stderr", "mean_q", "mean_q_stderr",
                                                            "second_moment", "second_moment_stderr"}));
  auto& atoms = r.table("atoms", detail::with_sweep(s, {"q", "count", "probability", "probability_stderr"}));
  for (const auto& point : detail::sweep_points(s)) {
    const ProtocolConfig c = build_config(s, point);
    const TransitionCounts counts = simulate(c, s.trajectories, s.threads);
    const auto jar = sample_mean(c, counts, [beta = c.beta](double q) { return std::exp(-beta * q); });
    const auto first = sample_mean(c, counts, [](double q) { return q; });
    const auto second = sample_mean(c, counts, [](double q) { return q * q; });
    const auto n = static_cast<double>(counts.total);
    summary.add_row(detail::with_sweep(point, {n, jar.estimate, jar.std_error, first.estimate, first.std_error, second.estimate,
                                               second.std_error}));
    for (const auto& a : empirical_distribution(c, counts).atoms)
      atoms.add_row(detail::with_sweep(point, {a.q, std::round(a.prob * n), a.prob, std::sqrt(a.prob * (1.0 - a.prob) / n)}));
  }
  return r;
}

/// Exact enumeration: atoms, G(u) on the requested grid and at u = i beta, moments by both routes.
inline Report cmd_exact(const ExperimentSpec& s) {
  Report r;
  detail::common_metadata(r, "exact", s);
  r.meta("max_terms", std::to_string(s.max_terms));
  auto& summary = r.table("summary", detail::with_sweep(s, {"total_probability", "jarzynski", "jarzynski_closed_form",
                                                            "unitality_residual", "moment1", "moment2", "moment3", "moment4",
                                                            "moment1_from_g", "moment2_from_g", "moment3_from_g", "moment4_from_g",
                                                            "mean_q_closed_form"}));
  auto& atoms = r.table("atoms", detail::with_sweep(s, {"q", "probability"}));
  ResultTable* grid = s.u_grid.empty() ? nullptr : &r.table("characteristic", detail::with_sweep(s, {"u_re", "u_im", "g_re", "g_im"}));
  for (const auto& point : detail::sweep_points(s)) {
    const ProtocolConfig c = build_config(s, point);
    const HeatDistribution dist = exact_distribution(c, s.max_terms);
    const Complex jar = characteristic_function(c, Complex(0.0, c.beta), s.max_terms);
    double closed = std::nan(""), closed_mean = std::nan("");
    if (detail::closed_form_applies(s, c)) {
      const auto p = tls_params(s, c, point);
      closed = tls::g_model(p, Complex(0.0, c.beta), c.model).real();
      closed_mean = tls::mean_heat(p, c.model);
    }
    std::vector<double> row{dist.total_probability(), jar.real(), closed, unitality_check(c, s.max_terms)};
    std::vector<double> from_g;
    for (int order = 1; order <= 4; ++order) {
      const MomentEstimate m = moment(c, order, s.max_terms);
      row.push_back(m.direct);
      from_g.push_back(m.from_characteristic);
    }
    row.insert(row.end(), from_g.begin(), from_g.end());
    row.push_back(closed_mean);
    summary.add_row(detail::with_sweep(point, row));
    for (const auto& a : dist.atoms) atoms.add_row(detail::with_sweep(point, {a.q, a.prob}));
    if (grid) {
      const auto g = characteristic_function(c, s.u_grid, s.max_terms);
      for (std::size_t i = 0; i < g.size(); ++i)
        grid->add_row(detail::with_sweep(point, {s.u_grid[i].real(), s.u_grid[i].imag(), g[i].real(), g[i].imag()}));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Figure data

struct FigureSpec {
  std::string name;
  double e = 1.0;
  double beta = 1.0;
  int m_count = 5;
  double tau = 1.0;  // fixed waiting time of fig1 and of the fig2 inset (0 = use <tau>)
  std::vector<double> amplitudes{0.0, 0.1, 0.5};
  std::vector<double> taus;  // two-point support
  double p1 = 0.3;
  double a2 = 0.2;
  double total_time = 5.0;
  std::vector<double> total_times;
  std::vector<double> p1_values;
  std::vector<int> m_values;
  int points = 21;
  std::uint64_t trajectories = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  Json effective;
};

inline FigureSpec figure_defaults(const std::string& name) {
  FigureSpec f;
  f.name = name;
  if (name == "fig1") {
    f.taus = {0.01, 3.0};
  } else if (name == "fig2") {
    f.taus = {0.01, 3.0};
    f.tau = 0.0;
  } else if (name == "fig3") {
    f.e = 0.5;
    f.taus = {0.1, 1.5};
    f.total_times = {1.5, 2.0, 2.5, 5.0, 10.0, 15.0, 20.0, 50.0};
    f.points = 141;
  } else if (name == "fig4") {
    f.e = 0.5;
    f.taus = {0.1, 0.5};
    f.p1_values = {0.0, 0.25, 0.5, 0.75, 1.0};
    f.points = 400;
  } else if (name == "fig5") {
    f.taus = {0.01, 3.0};
    f.m_values = {2, 10, 100};
    f.points = 51;
  } else {
    fail(ErrorCode::ConfigError, "figure: unknown figure '" + name + "' (expected fig1, fig2, fig3, fig4 or fig5)");
  }
  return f;
}

/// Figure name from `name_arg` or the config's "figure" field, built-in
/// parameters overridden by any other fields present.
inline FigureSpec parse_figure(const std::optional<Json>& doc, const std::string& name_arg, const Overrides& overrides) {
  std::string name = name_arg;
  if (doc && doc->contains("figure")) {
    const auto& v = doc->at("figure");
    if (!v.is_string()) config_fail("figure", "expected a string");
    if (!name.empty() && name != v.get<std::string>()) config_fail("figure", "config names " + v.get<std::string>() + " but " + name + " was requested");
    name = v.get<std::string>();
  }
  if (name.empty()) config_fail("figure", "no figure named (pass fig1..fig5 or set \"figure\" in the config)");
  FigureSpec f = figure_defaults(name);
  Json eff = doc ? *doc : Json::object();
  eff["figure"] = name;
  if (doc) {
    const Node n(*doc, "");
    n.has("figure");
    f.e = n.number("E", f.e);
    f.beta = n.number("beta", f.beta);
    f.m_count = static_cast<int>(n.integer("M", f.m_count));
    f.tau = n.number("tau", f.tau);
    if (n.has("a")) f.amplitudes = n.numbers("a");
    if (n.has("tau_values")) f.taus = n.numbers("tau_values");
    f.p1 = n.number("p1", f.p1);
    f.a2 = n.number("a2", f.a2);
    f.total_time = n.number("total_time", f.total_time);
    if (n.has("total_times")) f.total_times = n.numbers("total_times");
    if (n.has("p1_values")) f.p1_values = n.numbers("p1_values");
    if (n.has("M_values")) {
      f.m_values.clear();
      for (double m : n.numbers("M_values")) {
        if (m < 1 || m != std::floor(m)) config_fail("M_values", "entries must be integers >= 1");
        f.m_values.push_back(static_cast<int>(m));
      }
    }
    f.points = static_cast<int>(n.integer("points", f.points));
    f.trajectories = static_cast<std::uint64_t>(n.integer("trajectories", static_cast<std::int64_t>(f.trajectories)));
    f.seed = static_cast<std::uint64_t>(n.integer("seed", 0));
    f.threads = static_cast<unsigned>(n.integer("threads", 1));
    n.has("output");
    n.finish();
  }
  if (!(f.e > 0.0)) config_fail("E", "must be > 0");
  if (!(f.beta >= 0.0)) config_fail("beta", "must be >= 0");
  if (f.m_count < 1) config_fail("M", "must be >= 1");
  if (f.points < 2) config_fail("points", "must be >= 2");
  if (f.trajectories < 2) config_fail("trajectories", "must be >= 2");
  if (f.taus.size() != 2 || !(f.taus[0] > 0.0) || !(f.taus[1] > 0.0) || f.taus[0] == f.taus[1])
    config_fail("tau_values", "expected two distinct positive waiting times");
  if (!(f.p1 > 0.0 && f.p1 < 1.0)) config_fail("p1", "must lie in (0, 1)");
  if (!(f.a2 >= 0.0 && f.a2 <= 1.0)) config_fail("a2", "must lie in [0, 1]");
  for (double a : f.amplitudes)
    if (!(a >= 0.0 && a <= 1.0)) config_fail("a", "amplitudes must lie in [0, 1]");
  for (double p : f.p1_values)
    if (!(p >= 0.0 && p <= 1.0)) config_fail("p1_values", "entries must lie in [0, 1]");
  for (double t : f.total_times)
    if (!(t > 0.0)) config_fail("total_times", "entries must be > 0");
  if (overrides.seed) f.seed = *overrides.seed;
  if (overrides.threads) f.threads = *overrides.threads;
  eff["seed"] = f.seed;
  eff.erase("threads");
  eff.erase("output");
  f.effective = eff;
  return f;
}

namespace detail {

inline std::string label(const std::string& prefix, double x) { return prefix + format_number(x); }

inline std::vector<double> linspace(double from, double to, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = from + (to - from) * i / (points - 1);
  return out;
}

inline void figure_metadata(Report& r, const FigureSpec& f) {
  const std::string config = f.effective.dump();
  r.meta("qheat_version", std::string(version));
  r.meta("command", "figure " + f.name);
  r.meta("seed", std::to_string(f.seed));
  r.meta("config_hash", fnv1a_hex(config));
  r.meta("config", config);
}

// G(i beta) against c1 for each amplitude, closed form and Monte Carlo overlay.
inline void g_versus_c1(Report& r, const FigureSpec& f, const WaitingTimeModel& model) {
  std::vector<std::string> cols{"c1"};
  for (double a : f.amplitudes) cols.push_back(label("g_a", a));
  auto& analytic = r.table("analytic", cols);
  const Complex ib(0.0, f.beta);
  const auto grid = linspace(0.0, 1.0, f.points);
  for (double c1 : grid) {
    std::vector<double> row{c1};
    for (double a : f.amplitudes) row.push_back(tls::g_model(tls::TlsParams{f.e, a * a, c1, f.m_count, f.beta}, ib, model).real());
    analytic.add_row(row);
  }
  std::vector<std::string> mc_cols{"c1"};
  for (double a : f.amplitudes) {
    mc_cols.push_back(label("mc_a", a));
    mc_cols.push_back(label("stderr_a", a));
  }
  auto& mc = r.table("monte_carlo", mc_cols);
  for (double c1 : linspace(0.0, 1.0, 11)) {
    std::vector<double> row{c1};
    for (double a : f.amplitudes) {
      const auto c = tls::make_config(tls::TlsParams{f.e, a * a, c1, f.m_count, f.beta}, model, f.seed);
      const auto est = jarzynski_mc(c, f.trajectories, f.threads);
      row.push_back(est.estimate);
      row.push_back(est.std_error);
    }
    mc.add_row(row);
  }
}

}  // namespace detail

inline Report cmd_figure(const FigureSpec& f) {
  Report r;
  detail::figure_metadata(r, f);
  const DiscreteWaitingDist bimodal = DiscreteWaitingDist::bimodal(f.taus[0], f.taus[1], f.p1);
  const double thermal = tls::thermal_c1(f.e, f.beta);

  if (f.name == "fig1" || f.name == "fig2") {
    const double tau_bar = f.tau > 0.0 ? f.tau : mean_tau(bimodal);
    r.meta("E", format_number(f.e));
    r.meta("beta", format_number(f.beta));
    r.meta("M", std::to_string(f.m_count));
    r.meta("thermal_c1", format_number(thermal));
    r.meta("trajectories", std::to_string(f.trajectories));
    if (f.name == "fig1") {
      r.meta("model", "fixed tau=" + format_number(tau_bar));
      detail::g_versus_c1(r, f, Fixed(tau_bar));
      return r;
    }
    r.meta("model", detail::model_text(Annealed{bimodal}));
    r.meta("inset_fixed_tau", format_number(tau_bar));
    detail::g_versus_c1(r, f, Annealed{bimodal});
    auto& inset = r.table("inset", {"a", "a2", "slope_fixed", "slope_quenched", "slope_annealed"});
    const Complex ib(0.0, f.beta);
    for (int i = 0; i <= 20; ++i) {
      const double a = 0.05 * i;
      const tls::TlsParams p{f.e, a * a, 0.0, f.m_count, f.beta};
      inset.add_row({a, a * a, tls::slope_c1(p, ib, Fixed(tau_bar)).real(), tls::slope_c1(p, ib, Quenched{bimodal}).real(),
                     tls::slope_c1(p, ib, Annealed{bimodal}).real()});
    }
    return r;
  }

  if (f.name == "fig3") {
    r.meta("delta_E", format_number(2.0 * f.e));
    r.meta("a2", format_number(f.a2));
    r.meta("tau_values", format_number(f.taus[0]) + "," + format_number(f.taus[1]));
    r.meta("measurements", "round(T / mean_tau), at least 1");
    std::vector<std::string> cols{"mean_tau"};
    for (double t : f.total_times) cols.push_back(detail::label("delta_lambda_T", t));
    auto& table = r.table("delta_lambda", cols);
    const tls::TlsParams p{f.e, f.a2, 0.0, 1, f.beta};
    const DiscreteWaitingDist support = DiscreteWaitingDist::bimodal(f.taus[0], f.taus[1], 0.5);
    for (double target : detail::linspace(support.min_value(), support.max_value(), f.points)) {
      std::vector<double> row{target};
      for (double t : f.total_times) row.push_back(tls::delta_lambda(p, support, target, t));
      table.add_row(row);
    }
    return r;
  }

  if (f.name == "fig4") {
    r.meta("delta_E", format_number(2.0 * f.e));
    r.meta("a2", format_number(f.a2));
    r.meta("total_time", format_number(f.total_time));
    r.meta("tau_values", format_number(f.taus[0]) + "," + format_number(f.taus[1]) + " (scaled together)");
    std::vector<std::string> cols{"delta_E_mean_tau"};
    for (double p1 : f.p1_values) cols.push_back(detail::label("max_mean_heat_p1_", p1));
    auto& table = r.table("max_mean_heat", cols);
    const tls::TlsParams p{f.e, f.a2, 0.0, 1, f.beta};
    for (int i = 1; i <= f.points; ++i) {
      const double x = 4.0 * std::numbers::pi * i / f.points;
      std::vector<double> row{x};
      for (double p1 : f.p1_values) {
        const DiscreteWaitingDist d = p1 == 1.0   ? DiscreteWaitingDist::single(f.taus[0])
                                      : p1 == 0.0 ? DiscreteWaitingDist::single(f.taus[1])
                                                  : DiscreteWaitingDist::bimodal(f.taus[0], f.taus[1], p1);
        row.push_back(tls::max_mean_heat_annealed(p, d, x, f.total_time));
      }
      table.add_row(row);
    }
    return r;
  }

  // fig5
  r.meta("model", detail::model_text(Quenched{bimodal}));
  r.meta("E", format_number(f.e));
  r.meta("beta", format_number(f.beta));
  std::vector<std::string> cols{"a2"};
  for (int m : f.m_values) cols.push_back("slope_M" + std::to_string(m));
  cols.push_back("slope_asymptotic");
  auto& table = r.table("slope", cols);
  const Complex ib(0.0, f.beta);
  for (double a2 : detail::linspace(0.0, 0.5, f.points)) {
    std::vector<double> row{a2};
    for (int m : f.m_values) row.push_back(tls::slope_c1(tls::TlsParams{f.e, a2, 0.0, m, f.beta}, ib, Quenched{bimodal}).real());
    row.push_back(tls::asymptotic_slope_c1(tls::TlsParams{f.e, a2, 0.0, 1, f.beta}, ib).real());
    table.add_row(row);
  }
  return r;
}

}  // namespace qheat::cli
