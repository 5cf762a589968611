// tspde <experiment> --config <file> [--seed N] [--workers K] [--out DIR]
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric failure, 1 anything else.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tspde/cli/config.hpp"
#include "tspde/cli/runner.hpp"
#include "tspde/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tamed exponential Euler experiments for the stochastic heat equation on (0,1)"};
  app.set_version_flag("--version", tspde::cli::kVersion);

  std::string experiment;
  std::string config_path;
  tspde::cli::Overrides flags;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out_dir;
  bool quiet = false;

  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(tspde::cli::experiment_names()));
  app.add_option("-c,--config", config_path, "Configuration file (INI sections, or a manifest.json to replay)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Override sampling.seed");
  auto* workers_opt = app.add_option("--workers", workers, "Override sampling.workers")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out_dir, "Override output.directory");
  app.add_option("--set", flags.assignments, "Override any field: section.key=value (repeatable)");
  app.add_flag("-q,--quiet", quiet, "Suppress the report on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*seed_opt) flags.seed = seed;
  if (*workers_opt) flags.workers = workers;
  if (*out_opt) flags.out_dir = out_dir;

  tspde::cli::ExperimentConfig cfg;
  try {
    auto kv = tspde::cli::read_config_file(config_path);
    auto file_exp = kv[""].find("experiment");
    if (file_exp != kv[""].end() && file_exp->second != experiment)
      std::cerr << "note: running '" << experiment << "' although the file says '" << file_exp->second << "'\n";
    flags.experiment = experiment;
    cfg = tspde::cli::parse_config(std::move(kv), flags);
  } catch (const tspde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tspde::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';

  try {
    tspde::cli::RunResult result;
    const auto manifest = tspde::cli::write_run(cfg, &result);
    for (std::size_t i = cfg.warnings.size(); i < result.warnings.size(); ++i)
      std::cerr << "warning: " << result.warnings[i] << '\n';
    if (!quiet) {
      std::cout << result.report;
      std::cout << "wrote " << cfg.out_dir << "/manifest.json (config " << manifest["config_hash"].get<std::string>()
                << ")\n";
    }
  } catch (const tspde::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const tspde::OverflowError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const tspde::DomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const tspde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
