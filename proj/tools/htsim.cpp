// htsim: command-line driver for the harmonic attractor simulator.
//
// Exit status: 0 all verdicts pass, 2 a verdict failed, 3 invalid input or config,
// 4 the simulation diverged.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harmonic/errors.hpp"
#include "harmonic/experiment.hpp"

namespace {

constexpr int kExitFailedVerdict = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitDiverged = 4;

void print_report(const harmonic::ExperimentReport& report, const harmonic::OutputBundle& bundle) {
  std::cout << report.experiment() << ": " << (report.passed() ? "PASS" : "FAIL") << "\n";
  for (const auto& [name, pass] : report.verdicts()) {
    std::cout << "  " << (pass ? "pass " : "FAIL ") << name << "\n";
  }
  std::cout << "  report " << bundle.report.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic attractor network simulator"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--seed", seed, "Override the RNG seed");
  app.add_flag("-q,--quiet", quiet, "Only set the exit status");

  std::string config;
  std::string out;

  auto* simulate = app.add_subcommand("simulate", "Run one config file");
  simulate->add_option("-c,--config", config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", out, "Output directory (default: the config's output_dir)");

  std::string name;
  auto* experiment = app.add_subcommand("experiment", "Run a built-in experiment");
  experiment->add_option("name", name, "rotation-180, torus-independence, compositional or stability")
      ->required();
  experiment->add_option("-o,--out", out, "Output directory (default: out/<name>)");

  std::string param;
  std::vector<std::string> values;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Vary one config key and tabulate the runs");
  sweep->add_option("-c,--config", config, "Base config file (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("-p,--param", param, "Dotted key, e.g. kernel.j_exc")->required();
  sweep->add_option("--values", values, "Comma-separated values, each parsed as JSON")
      ->expected(0, -1)
      ->delimiter(',');
  sweep->add_option("-o,--out", out, "Output directory")->required();
  sweep->add_option("-j,--threads", threads, "Worker threads (0: hardware concurrency)");

  auto* validate = app.add_subcommand("validate", "Parse and validate a config without running it");
  validate->add_option("-c,--config", config, "Config file (JSON)")->required()->check(CLI::ExistingFile);

  for (auto* sub : {simulate, experiment, sweep, validate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*validate) {
      const harmonic::ExperimentSpec spec = harmonic::load_config(config);
      spec.validate();
      if (!quiet) std::cout << config << ": valid\n";
      return 0;
    }
    if (*simulate) {
      const auto out_dir = out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out);
      const auto [bundle, outcome] = harmonic::run_from_config(config, out_dir, seed);
      if (!quiet) print_report(outcome.report, bundle);
      return outcome.report.passed() ? 0 : kExitFailedVerdict;
    }
    if (*experiment) {
      const auto outcome = harmonic::run_named_experiment(name, seed.value_or(0));
      const std::filesystem::path dir = out.empty() ? std::filesystem::path("out") / name : std::filesystem::path(out);
      const auto bundle = harmonic::write_outcome(outcome, dir);
      if (!quiet) print_report(outcome.report, bundle);
      return outcome.report.passed() ? 0 : kExitFailedVerdict;
    }
    if (*sweep) {
      harmonic::ExperimentSpec base = harmonic::load_config(config);
      if (seed) base.seed = *seed;
      std::erase(values, std::string());
      const auto rows = harmonic::sweep(base, param, values, std::filesystem::path(out), threads);
      if (!quiet) std::cout << harmonic::sweep_csv(rows);
      return 0;
    }
  } catch (const harmonic::DivergenceError& e) {
    std::cerr << "error: " << e.what() << " (t = " << e.t_ms() << " ms)\n";
    return kExitDiverged;
  } catch (const harmonic::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
