#pragma once

// JSON experiment description for the qheat command-line tool.
//
//   {
//     "system": {"type": "tls", "E": 1.0, "a2": 0.25}
//             | {"type": "matrix", "hamiltonian": {"re": [[...]], "im": [[...]]},
//                "basis": {"re": [[...]], "im": [[...]]}, "outcomes": [...]},
//     "initial_state": {"type": "thermal"} | {"type": "c1", "c1": 0.3}
//                    | {"type": "populations", "values": [...]}
//                    | {"type": "matrix", "re": [[...]], "im": [[...]]},
//     "protocol": {"measurements": 5} | {"total_time": 5.0},
//     "waiting_times": {"model": "fixed", "tau": 1.0}
//                    | {"model": "quenched" | "annealed", "values": [...], "probs": [...]},
//     "beta": 1.0, "seed": 1, "trajectories": 10000, "threads": 1,
//     "sweep": {"parameter": "c1", "values": [...]} | {"parameter": "a2", "from": 0, "to": 1, "steps": 11},
//     "u_grid": [0.5, {"re": 0.0, "im": 1.0}],
//     "max_terms": 10000000
//   }
//
// Basis matrices hold the measurement vectors as columns. The matrix-system
// hamiltonian is given in the same (computational) coordinates.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qheat/disorder.hpp"
#include "qheat/error.hpp"
#include "qheat/heat_statistics.hpp"
#include "qheat/quantum_core.hpp"
#include "qheat/tls.hpp"

namespace qheat::cli {

using Json = nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigError, (path.empty() ? std::string("config") : path) + ": " + what);
}

/// Read-only view of a JSON object that remembers its path for diagnostics
/// and rejects fields it was never asked about.
class Node {
 public:
  Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_fail(path_, "expected an object");
  }

  bool has(const std::string& key) const {
    seen_.insert(key);
    return j_.contains(key);
  }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json& raw(const std::string& key) const {
    if (!has(key)) config_fail(field(key), "missing required field");
    return j_.at(key);
  }
  Node object(const std::string& key) const { return Node(raw(key), field(key)); }

  double number(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number()) config_fail(field(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number_integer() && !(v.is_number_float() && v.get<double>() == std::floor(v.get<double>())))
      config_fail(field(key), "expected an integer");
    return v.is_number_integer() ? v.get<std::int64_t>() : static_cast<std::int64_t>(v.get<double>());
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_string()) config_fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_array() || v.empty()) config_fail(field(key), "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) config_fail(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  // Square real matrix from an array of rows.
  Eigen::MatrixXd matrix(const std::string& key) const {
    const Json& v = raw(key);
    const std::string where = field(key);
    if (!v.is_array() || v.empty()) config_fail(where, "expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Json& row = v[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
        config_fail(where + "[" + std::to_string(i) + "]", "expected a row of " + std::to_string(n) + " numbers");
      for (Eigen::Index k = 0; k < n; ++k) {
        const Json& x = row[static_cast<std::size_t>(k)];
        if (!x.is_number()) config_fail(where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]", "expected a number");
        m(i, k) = x.get<double>();
      }
    }
    return m;
  }

  // "re" and "im" rows of this object; "im" may be omitted.
  ComplexMatrix complex_parts() const {
    const Eigen::MatrixXd re = matrix("re");
    Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
    if (has("im")) {
      im = matrix("im");
      if (im.rows() != re.rows()) config_fail(field("im"), "size differs from re");
    }
    ComplexMatrix out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return out;
  }
  ComplexMatrix complex_matrix(const std::string& key) const {
    const Node n = object(key);
    ComplexMatrix out = n.complex_parts();
    n.finish();
    return out;
  }

  // Raises on keys that were never looked up (typos, unsupported options).
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key)) config_fail(field(key), "unknown field");
  }

  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

enum class SystemKind { Tls, Matrix };
enum class StateKind { Thermal, C1, Populations, Matrix };

struct SystemSpec {
  SystemKind kind = SystemKind::Tls;
  double e = 1.0;
  double a2 = 0.5;
  ComplexMatrix hamiltonian;
  ComplexMatrix basis;
  std::vector<double> outcomes;
};

struct StateSpec {
  StateKind kind = StateKind::Thermal;
  double c1 = 0.5;
  std::vector<double> populations;
  ComplexMatrix matrix;
};

struct SweepSpec {
  std::string parameter;  // c1 | a2 | beta | measurements | tau | mean_tau
  std::vector<double> values;
};

struct ExperimentSpec {
  SystemSpec system;
  StateSpec state;
  Schedule schedule = MeasurementCount{1};
  WaitingTimeModel model = Fixed(1.0);
  double beta = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t trajectories = 10000;
  unsigned threads = 1;
  std::optional<SweepSpec> sweep;
  std::vector<Complex> u_grid;
  std::uint64_t max_terms = default_term_cap;
  Json effective;  // the parsed document with overrides applied, minus "threads"
};

inline const std::set<std::string> sweep_parameters = {"c1", "a2", "beta", "measurements", "tau", "mean_tau"};

namespace detail {

inline SystemSpec parse_system(const Node& n) {
  SystemSpec s;
  const std::string type = n.string("type");
  if (type == "tls") {
    s.kind = SystemKind::Tls;
    s.e = n.number("E");
    s.a2 = n.number("a2");
    if (!(s.e > 0.0) || !std::isfinite(s.e)) config_fail(n.field("E"), "must be finite and > 0");
    if (!(s.a2 >= 0.0 && s.a2 <= 1.0)) config_fail(n.field("a2"), "must lie in [0, 1]");
  } else if (type == "matrix") {
    s.kind = SystemKind::Matrix;
    s.hamiltonian = n.complex_matrix("hamiltonian");
    s.basis = n.complex_matrix("basis");
    if (s.basis.rows() != s.hamiltonian.rows()) config_fail(n.field("basis"), "dimension differs from hamiltonian");
    if (n.has("outcomes")) {
      s.outcomes = n.numbers("outcomes");
      if (s.outcomes.size() != static_cast<std::size_t>(s.basis.cols()))
        config_fail(n.field("outcomes"), "expected one outcome per basis vector");
    }
  } else {
    config_fail(n.field("type"), "unknown system type '" + type + "' (expected tls or matrix)");
  }
  n.finish();
  return s;
}

inline StateSpec parse_state(const Node& n, const SystemSpec& system) {
  StateSpec s;
  const std::string type = n.string("type");
  if (type == "thermal") {
    s.kind = StateKind::Thermal;
  } else if (type == "c1") {
    if (system.kind != SystemKind::Tls) config_fail(n.field("type"), "c1 states need a tls system");
    s.kind = StateKind::C1;
    s.c1 = n.number("c1");
    if (!(s.c1 >= 0.0 && s.c1 <= 1.0)) config_fail(n.field("c1"), "must lie in [0, 1]");
  } else if (type == "populations") {
    s.kind = StateKind::Populations;
    s.populations = n.numbers("values");
    double total = 0.0;
    for (double p : s.populations) {
      if (p < 0.0) config_fail(n.field("values"), "populations must be >= 0");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) config_fail(n.field("values"), "populations sum to " + std::to_string(total) + ", expected 1");
  } else if (type == "matrix") {
    s.kind = StateKind::Matrix;
    s.matrix = n.complex_parts();
  } else {
    config_fail(n.field("type"), "unknown initial_state type '" + type + "' (expected thermal, c1, populations or matrix)");
  }
  n.finish();
  return s;
}

inline WaitingTimeModel parse_waiting_times(const Node& n) {
  const std::string model = n.string("model");
  if (model == "fixed") {
    const double tau = n.number("tau");
    if (!(tau > 0.0) || !std::isfinite(tau)) config_fail(n.field("tau"), "must be finite and > 0");
    n.finish();
    return Fixed(tau);
  }
  if (model != "quenched" && model != "annealed")
    config_fail(n.field("model"), "unknown model '" + model + "' (expected fixed, quenched or annealed)");
  const std::vector<double> values = n.numbers("values");
  const std::vector<double> probs = n.numbers("probs");
  n.finish();
  if (values.size() != probs.size())
    config_fail(n.field("probs"), "has " + std::to_string(probs.size()) + " entries but values has " + std::to_string(values.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0)) config_fail(n.field("probs") + "[" + std::to_string(i) + "]", "must be > 0");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << total << ", expected 1 (tolerance 1e-12)";
    config_fail(n.field("probs"), msg.str());
  }
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      config_fail(n.field("values") + "[" + std::to_string(i) + "]", "waiting times must be finite and > 0");
  try {
    DiscreteWaitingDist dist(values, probs);
    if (model == "quenched") return Quenched{std::move(dist)};
    return Annealed{std::move(dist)};
  } catch (const Error& e) {
    config_fail(n.field("values"), e.message());
  }
}

inline Schedule parse_protocol(const Node& n) {
  const bool by_count = n.has("measurements");
  const bool by_time = n.has("total_time");
  if (by_count == by_time) config_fail(n.path(), "give exactly one of measurements or total_time");
  Schedule s;
  if (by_count) {
    const auto m = n.integer("measurements");
    if (m < 1) config_fail(n.field("measurements"), "must be >= 1");
    s = MeasurementCount{static_cast<int>(m)};
  } else {
    const double t = n.number("total_time");
    if (!(t > 0.0) || !std::isfinite(t)) config_fail(n.field("total_time"), "must be finite and > 0");
    s = TotalTime{t};
  }
  n.finish();
  return s;
}

inline SweepSpec parse_sweep(const Node& n) {
  SweepSpec s;
  s.parameter = n.string("parameter");
  if (!sweep_parameters.contains(s.parameter))
    config_fail(n.field("parameter"), "unknown sweep parameter '" + s.parameter + "' (expected c1, a2, beta, measurements, tau or mean_tau)");
  if (n.has("values")) {
    s.values = n.numbers("values");
  } else {
    const double from = n.number("from");
    const double to = n.number("to");
    const auto steps = n.integer("steps");
    if (steps < 1) config_fail(n.field("steps"), "must be >= 1");
    if (steps == 1 && from != to) config_fail(n.field("steps"), "a single step needs from == to");
    for (std::int64_t i = 0; i < steps; ++i)
      s.values.push_back(steps == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1));
  }
  n.finish();
  const bool up = s.values.size() < 2 || s.values[1] > s.values[0];
  for (std::size_t i = 1; i < s.values.size(); ++i)
    if (up ? !(s.values[i] > s.values[i - 1]) : !(s.values[i] < s.values[i - 1]))
      config_fail(n.field("values"), "sweep grid must be strictly monotone");
  return s;
}

inline std::vector<Complex> parse_u_grid(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) config_fail(path, "expected a non-empty array");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string where = path + "[" + std::to_string(i) + "]";
    if (v[i].is_number()) {
      out.emplace_back(v[i].get<double>(), 0.0);
    } else if (v[i].is_object()) {
      const Node n(v[i], where);
      out.emplace_back(n.number("re", 0.0), n.number("im", 0.0));
      n.finish();
    } else {
      config_fail(where, "expected a number or {\"re\", \"im\"}");
    }
  }
  return out;
}

}  // namespace detail

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

inline ExperimentSpec parse_spec(const Json& doc, const Overrides& overrides = {}) {
  const Node root(doc, "");
  ExperimentSpec s;
  s.system = detail::parse_system(root.object("system"));
  s.state = root.has("initial_state") ? detail::parse_state(root.object("initial_state"), s.system) : StateSpec{};
  s.schedule = detail::parse_protocol(root.object("protocol"));
  s.model = detail::parse_waiting_times(root.object("waiting_times"));
  s.beta = root.number("beta", 1.0);
  if (!(s.beta >= 0.0) || !std::isfinite(s.beta)) config_fail("beta", "must be finite and >= 0");
  const auto seed = root.integer("seed", 0);
  if (seed < 0) config_fail("seed", "must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  const auto trajectories = root.integer("trajectories", 10000);
  if (trajectories < 2) config_fail("trajectories", "must be >= 2");
  s.trajectories = static_cast<std::uint64_t>(trajectories);
  const auto threads = root.integer("threads", 1);
  if (threads < 1 || threads > 1024) config_fail("threads", "must be in 1..1024");
  s.threads = static_cast<unsigned>(threads);
  if (root.has("sweep")) s.sweep = detail::parse_sweep(root.object("sweep"));
  if (root.has("u_grid")) s.u_grid = detail::parse_u_grid(root.raw("u_grid"), "u_grid");
  const auto max_terms = root.integer("max_terms", static_cast<std::int64_t>(default_term_cap));
  if (max_terms < 1) config_fail("max_terms", "must be >= 1");
  s.max_terms = static_cast<std::uint64_t>(max_terms);
  root.has("output");  // accepted, handled by the front end
  root.finish();

  if (s.sweep) {
    const auto& p = s.sweep->parameter;
    const bool tls_only = p == "c1" || p == "a2";
    if (tls_only && s.system.kind != SystemKind::Tls) config_fail("sweep.parameter", p + " sweeps need a tls system");
    if (p == "c1" && s.state.kind == StateKind::Thermal) s.state.kind = StateKind::C1;
    if (p == "c1" && s.state.kind != StateKind::C1) config_fail("sweep.parameter", "c1 sweeps need a c1 initial_state");
    if (p == "measurements" && !std::holds_alternative<MeasurementCount>(s.schedule))
      config_fail("sweep.parameter", "measurements sweeps need protocol.measurements");
    if (p == "tau" && !std::holds_alternative<Fixed>(s.model)) config_fail("sweep.parameter", "tau sweeps need the fixed model");
    if (p == "mean_tau" && (std::holds_alternative<Fixed>(s.model) || support_size(s.model) != 2))
      config_fail("sweep.parameter", "mean_tau sweeps need a two-point quenched or annealed law");
  }

  s.effective = doc;
  if (overrides.seed) {
    s.seed = *overrides.seed;
    s.effective["seed"] = s.seed;
  }
  if (overrides.threads) s.threads = *overrides.threads;
  s.effective.erase("threads");
  s.effective.erase("output");
  return s;
}

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // drop the "[json.exception.parse_error.N] " tag; the rest names line and column
    std::string what = e.what();
    if (const auto tag = what.find("] "); what.starts_with("[json.exception") && tag != std::string::npos) what.erase(0, tag + 2);
    fail(ErrorCode::ConfigError, source + ": invalid JSON, " + what);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ExperimentSpec load_spec(const std::string& path, const Overrides& overrides = {}) {
  const Json doc = parse_json_text(read_file(path), path);
  try {
    return parse_spec(doc, overrides);
  } catch (const Error& e) {
    fail(e.code(), path + ": " + e.message());
  }
}

/// ProtocolConfig for one sweep point (or the base spec when value is empty).
inline ProtocolConfig build_config(const ExperimentSpec& s, std::optional<double> value = std::nullopt) {
  const std::string param = value && s.sweep ? s.sweep->parameter : std::string();
  SystemSpec system = s.system;
  StateSpec state = s.state;
  Schedule schedule = s.schedule;
  WaitingTimeModel model = s.model;
  double beta = s.beta;
  const auto bad = [&](const std::string& what) { config_fail("sweep.values", what); };
  if (param == "c1") {
    if (!(*value >= 0.0 && *value <= 1.0)) bad("c1 values must lie in [0, 1]");
    state.c1 = *value;
  } else if (param == "a2") {
    if (!(*value >= 0.0 && *value <= 1.0)) bad("a2 values must lie in [0, 1]");
    system.a2 = *value;
  } else if (param == "beta") {
    if (!(*value >= 0.0)) bad("beta values must be >= 0");
    beta = *value;
  } else if (param == "measurements") {
    if (*value < 1.0 || *value != std::floor(*value)) bad("measurements values must be integers >= 1");
    schedule = MeasurementCount{static_cast<int>(*value)};
  } else if (param == "tau") {
    if (!(*value > 0.0)) bad("tau values must be > 0");
    model = Fixed(*value);
  } else if (param == "mean_tau") {
    const auto& dist = std::holds_alternative<Quenched>(model) ? std::get<Quenched>(model).dist : std::get<Annealed>(model).dist;
    const DiscreteWaitingDist matched = tls::dist_with_mean(dist, *value);
    if (std::holds_alternative<Quenched>(model)) model = Quenched{matched};
    else model = Annealed{matched};
  }

  HermitianOperator h = [&] {
    if (system.kind == SystemKind::Tls) return tls::hamiltonian(tls::TlsParams{system.e, system.a2, 0.5, 1, beta});
    return spectral_decompose(system.hamiltonian);
  }();
  MeasurementBasis basis = system.kind == SystemKind::Tls
                               ? tls::measurement_basis(tls::TlsParams{system.e, system.a2, 0.5, 1, beta})
                               : MeasurementBasis::from_vectors(system.basis, system.outcomes);
  DensityMatrix rho0 = [&] {
    switch (state.kind) {
      case StateKind::Thermal: return thermal_state(h, beta);
      case StateKind::C1: {
        const double pops[] = {1.0 - state.c1, state.c1};
        return diagonal_state(h, pops);
      }
      case StateKind::Populations:
        if (state.populations.size() != h.dim()) config_fail("initial_state.values", "expected one population per energy level");
        return diagonal_state(h, state.populations);
      default:
        if (static_cast<std::size_t>(state.matrix.rows()) != h.dim()) config_fail("initial_state", "dimension differs from the system");
        return DensityMatrix(state.matrix);
    }
  }();
  ProtocolConfig c{std::move(h), std::move(basis), std::move(rho0), schedule, model, beta, s.seed};
  validate(c);
  return c;
}

inline tls::TlsParams tls_params(const ExperimentSpec& s, const ProtocolConfig& c, std::optional<double> value = std::nullopt) {
  tls::TlsParams p{s.system.e, s.system.a2, 0.5, 1, c.beta};
  if (value && s.sweep && s.sweep->parameter == "a2") p.a2 = *value;
  p.c1 = first_measurement_probs(c.rho0, c.h)[1];
  if (const auto* mc = std::get_if<MeasurementCount>(&c.schedule)) p.m_count = mc->m_count;
  return p;
}

}  // namespace qheat::cli
