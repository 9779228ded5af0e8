// qheat: command-line front end.
//
//   qheat simulate|exact|figure|verify --config <file> [--seed S] [--threads N] [--out <file>]
//
// Exit status: 0 success, 2 config error, 3 enumeration cap exceeded,
// 4 verification failure, 1 anything else.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "qheat/acceptance.hpp"
#include "qheat/commands.hpp"
#include "qheat/config.hpp"

namespace {

enum Exit { ok = 0, internal = 1, config_error = 2, enumeration_cap = 3, verification_failed = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "JSON configuration file");
  if (config_required) opt->required();
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--threads", c.threads, "worker threads for trajectory batches")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--out", c.out, "output file (default: stdout)");
}

// --out from the command line wins over "output" in the config.
std::string output_path(const Common& c, const std::optional<qheat::cli::Json>& doc) {
  if (!c.out.empty()) return c.out;
  if (doc && doc->contains("output")) {
    const auto& v = doc->at("output");
    if (!v.is_string()) qheat::cli::config_fail("output", "expected a file path string");
    return v.get<std::string>();
  }
  return {};
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) qheat::fail(qheat::ErrorCode::ConfigError, path + ": cannot open output file");
  out << text;
  if (!out) qheat::fail(qheat::ErrorCode::ConfigError, path + ": write failed");
}

std::optional<qheat::cli::Json> load_document(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return qheat::cli::parse_json_text(qheat::cli::read_file(path), path);
}

qheat::cli::ExperimentSpec load_experiment(const Common& c, const qheat::cli::Json& doc) {
  try {
    return qheat::cli::parse_spec(doc, {c.seed, c.threads});
  } catch (const qheat::Error& e) {
    qheat::fail(e.code(), c.config + ": " + e.message());
  }
}

int run_verify(const Common& c) {
  using namespace qheat;
  const auto doc = load_document(c.config);
  acceptance::AcceptanceOptions o;
  if (doc) {
    try {
      const cli::Node n(*doc, "");
      o.seed = static_cast<std::uint64_t>(n.integer("seed", static_cast<std::int64_t>(o.seed)));
      o.threads = static_cast<unsigned>(n.integer("threads", 1));
      if (n.has("criteria"))
        for (double id : n.numbers("criteria")) {
          if (id < 1 || id > 10 || id != std::floor(id)) cli::config_fail("criteria", "entries must be integers in 1..10");
          o.only.insert(static_cast<int>(id));
        }
      // an embedded experiment is validated like a simulate config
      if (n.has("experiment")) {
        try {
          cli::parse_spec(n.raw("experiment"));
        } catch (const Error& e) {
          fail(e.code(), "experiment." + e.message());
        }
      }
      n.has("output");
      n.finish();
    } catch (const Error& e) {
      fail(e.code(), c.config + ": " + e.message());
    }
  }
  if (c.seed) o.seed = *c.seed;
  if (c.threads) o.threads = *c.threads;
  std::error_code ec;
  const auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) o.executable = self.string();

  const std::string out_path = output_path(c, doc);
  std::string text = "# qheat_version: " + std::string(version) + "\n# command: verify\n# seed: " + std::to_string(o.seed) + "\n";
  std::cout << text << std::flush;
  int passed = 0, total = 0;
  acceptance::run_acceptance(o, [&](const acceptance::CriterionResult& r) {
    const std::string line = acceptance::format_line(r);
    std::cout << line << std::flush;
    text += line;
    passed += r.pass;
    ++total;
  });
  const std::string summary = "# result: " + std::to_string(passed) + "/" + std::to_string(total) + " criteria passed\n";
  std::cout << summary << std::flush;
  text += summary;
  if (!out_path.empty()) write_output(out_path, text);
  return passed == total ? Exit::ok : Exit::verification_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qheat: heat statistics of a quantum system under repeated projective measurements"};
  app.set_version_flag("--version", std::string(qheat::version));
  app.require_subcommand(1);

  Common common;
  std::string figure_name;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo trajectories: heat histogram, Jarzynski estimate, moments");
  auto* exact = app.add_subcommand("exact", "exact heat distribution, characteristic function and moments");
  auto* figure = app.add_subcommand("figure", "data for fig1..fig5 (built-in parameters, overridable from --config)");
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  add_common(simulate, common, true);
  add_common(exact, common, true);
  add_common(figure, common, false);
  add_common(verify, common, false);
  figure->add_option("which", figure_name, "fig1, fig2, fig3, fig4 or fig5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return Exit::config_error;
  }

  try {
    if (verify->parsed()) return run_verify(common);
    const auto doc = load_document(common.config);
    const std::string out_path = output_path(common, doc);
    qheat::Report report;
    if (figure->parsed()) {
      try {
        report = qheat::cli::cmd_figure(qheat::cli::parse_figure(doc, figure_name, {common.seed, common.threads}));
      } catch (const qheat::Error& e) {
        if (common.config.empty()) throw;
        qheat::fail(e.code(), common.config + ": " + e.message());
      }
    } else {
      const auto spec = load_experiment(common, *doc);
      report = simulate->parsed() ? qheat::cli::cmd_simulate(spec) : qheat::cli::cmd_exact(spec);
    }
    write_output(out_path, report.render());
    return Exit::ok;
  } catch (const qheat::Error& e) {
    std::cerr << "qheat: " << qheat::to_string(e.code()) << ": " << e.message() << "\n";
    switch (e.code()) {
      case qheat::ErrorCode::EnumerationTooLarge:
        std::cerr << "qheat: lower the measurement count or support size, use `simulate`, or raise \"max_terms\" in the config\n";
        return Exit::enumeration_cap;
      case qheat::ErrorCode::MomentMismatch:
        return Exit::internal;
      default:
        return Exit::config_error;
    }
  } catch (const std::exception& e) {
    std::cerr << "qheat: internal error: " << e.what() << "\n";
    return Exit::internal;
  }
}
