// qmc: command-line front end.
//
//   qmc [--config PATH] [--seed N] [--out PATH] [--format csv|json]
//       [--set key=value]... [--threads N] COMMAND
//
// Exit codes: 0 success, 1 usage or config error, 2 domain error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

int fail(int code, const std::string& msg) {
  std::cerr << "qmc: " << msg << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-accelerated Monte Carlo estimation: simulators, sweeps and resource tables"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, format;
  std::vector<std::string> assignments;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (overrides config)");
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--set", assignments, "config override, key=value (repeatable)");
  app.add_option("--threads", threads, "worker threads (results do not depend on it)");

  std::string record_path;
  auto* price = app.add_subcommand("price", "run the configured estimator once");
  auto* sweep = app.add_subcommand("sweep", "convergence sweep over n_samples, max_depth_exponent or epsilon x beta");
  auto* tradeoff = app.add_subcommand("tradeoff", "classical vs quantum sample table over epsilon x beta");
  auto* hardware = app.add_subcommand("hardware-map", "regime of each (clock ratio, gate error) cell");
  auto* schedule = app.add_subcommand("schedule", "interpolating schedule for estimator.epsilon, estimator.beta");
  auto* resources = app.add_subcommand("resources", "qubits, depth and calls per algorithm");
  auto* grid = app.add_subcommand("grid", "dump the discretized market grid");
  auto* record = app.add_subcommand("record", "sample a schedule and emit the raw depth,shots,hits record");
  auto* fit = app.add_subcommand("fit", "maximum-likelihood refit of a recorded depth,shots,hits CSV");
  fit->add_option("--record", record_path, "record CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    qmc::RunConfig cfg;
    if (!config_path.empty()) qmc::apply_config_file(cfg, config_path);
    for (const auto& a : assignments) qmc::apply_assignment(cfg, a);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!out_path.empty()) cfg.output.path = out_path;
    if (!format.empty()) cfg.output.format = format;
    qmc::finalize_config(cfg);

    namespace c = qmc::cli;
    c::Table table;
    if (*price) {
      table = c::cmd_price(cfg);
    } else if (*sweep) {
      table = c::cmd_sweep(cfg);
    } else if (*tradeoff) {
      table = c::cmd_tradeoff(cfg);
    } else if (*hardware) {
      table = c::cmd_hardware_map(cfg);
    } else if (*schedule) {
      table = c::cmd_schedule(cfg);
    } else if (*resources) {
      table = c::cmd_resources(cfg);
    } else if (*grid) {
      table = c::cmd_grid(cfg);
    } else if (*record) {
      table = c::cmd_record(cfg);
    } else if (*fit) {
      table = c::cmd_fit(cfg, record_path);
    }

    const auto text = c::render(table, cfg.output.format);
    if (cfg.output.path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(cfg.output.path, std::ios::binary);
      if (!out) return fail(1, "cannot write '" + cfg.output.path + "'");
      out << text;
    }
    return 0;
  } catch (const qmc::ConfigError& e) {
    return fail(1, e.what());
  } catch (const std::exception& e) {
    return fail(2, e.what());
  }
}
