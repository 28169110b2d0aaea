// Command-line front end: run scenarios, summarize manifests, list scenarios.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmchain/io.hpp"
#include "mmchain/scenario.hpp"

namespace {

int run_command(const std::string& config, const std::vector<std::string>& sets, const std::string& out,
                std::optional<std::uint64_t> seed, std::optional<std::size_t> paths, std::size_t threads) {
  mmchain::RunOptions opts;
  opts.out_dir = out;
  opts.overrides = sets;
  if (seed) opts.overrides.push_back("run.seed=" + std::to_string(*seed));
  if (paths) opts.overrides.push_back("run.paths=" + std::to_string(*paths));
  opts.exec.threads = threads;
  opts.log = &std::cerr;
  const auto result = mmchain::run_config_file(config, opts);
  std::cout << result.manifest.string() << "\n";
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minorizing-measure chaining bounds and their Monte Carlo verification"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::size_t threads = 1;
  auto* run = app.add_subcommand("run", "Run a scenario or suite config");
  run->add_option("--config,-c", config, "Scenario or suite JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", sets, "Override a config entry, key.path=value (repeatable)");
  run->add_option("--seed", seed, "Override run.seed");
  run->add_option("--paths", paths, "Override run.paths")->check(CLI::PositiveNumber);
  run->add_option("--out,-o", out, "Output directory (default $MMCHAIN_OUT or ./mmchain_out)");
  run->add_option("--threads,-j", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string manifest;
  auto* rep = app.add_subcommand("report", "Summarize a manifest and write a plot-ready CSV");
  rep->add_option("manifest", manifest, "manifest.json or suite_manifest.json")->required();

  std::string dir;
  auto* list = app.add_subcommand("list-scenarios", "List scenario configs");
  list->add_option("--dir", dir, "Scenario directory (default $MMCHAIN_SCENARIOS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mmchain::kExitInput;
  }

  try {
    if (*run) return run_command(config, sets, out, seed, paths, threads);
    if (*rep) {
      std::cout << mmchain::report(manifest);
      return mmchain::kExitOk;
    }
    if (*list) {
      std::cout << mmchain::list_scenarios(dir.empty() ? mmchain::default_scenario_dir() : std::filesystem::path(dir));
      return mmchain::kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mmchain::kExitInput;
  }
  return mmchain::kExitInput;
}
