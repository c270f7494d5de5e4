// Command-line experiment runner.
//
//   fracspde run <config> [--output DIR] [--workers N]
//   fracspde validate <config>
//   fracspde version
//
// Exit codes: 0 ok, 1 config error, 2 numeric error.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fracspde/experiments.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_numeric = 2;

constexpr const char* output_env = "FRACSPDE_OUTPUT_DIR";

std::filesystem::path output_dir(const fracspde::ExperimentConfig& c, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!c.output.dir.empty()) return c.output.dir;
  if (const char* env = std::getenv(output_env); env && *env) return env;
  return "fracspde_out";
}

int report(const fracspde::Diagnostics& dg) {
  for (const auto& d : dg.items()) std::cerr << "config error: " << d << "\n";
  return exit_config;
}

int cmd_validate(const std::string& path) {
  fracspde::Diagnostics dg;
  auto j = fracspde::read_json_file(path, dg);
  if (dg.ok()) fracspde::parse_config(j, dg, std::filesystem::path(path).parent_path());
  if (!dg.ok()) return report(dg);
  std::cout << "ok: " << path << " (hash " << fracspde::config_hash(j) << ")\n";
  return exit_ok;
}

int cmd_run(const std::string& path, const std::string& out_flag, int workers_flag) {
  fracspde::Diagnostics dg;
  auto j = fracspde::read_json_file(path, dg);
  fracspde::ExperimentConfig cfg;
  if (dg.ok()) cfg = fracspde::parse_config(j, dg, std::filesystem::path(path).parent_path());
  if (!dg.ok()) return report(dg);
  const int workers = workers_flag > 0 ? workers_flag : cfg.mc.workers;
  const auto started = fracspde::utc_now();
  try {
    auto result = fracspde::run_experiment(cfg, workers);
    const auto dir = output_dir(cfg, out_flag);
    auto manifest = fracspde::write_artifacts(cfg, result, dir, started, workers);
    std::cout << cfg.experiment << ": wrote " << result.tables.size() << " table(s) to " << dir.string() << "\n";
    std::cout << manifest["summary"].dump() << "\n";
  } catch (const fracspde::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const fracspde::numeric_error& e) {
    std::cerr << "numeric error in " << cfg.experiment << ": " << e.what() << "\n";
    return exit_numeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return exit_config;
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-field solutions of fractional-noise SPDEs: experiment runner"};
  app.require_subcommand(1);
  std::string config, out;
  int workers = 0;
  auto* run = app.add_subcommand("run", "Run an experiment and write CSV tables and manifest.json");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("-o,--output", out, std::string("Output directory (default: config output.dir, then $") + output_env + ")");
  run->add_option("-w,--workers", workers, "Worker threads (overrides mc.workers)")->check(CLI::PositiveNumber);
  auto* val = app.add_subcommand("validate", "Check a config and print diagnostics");
  val->add_option("config", config, "Experiment config (JSON)")->required();
  app.add_subcommand("version", "Print the toolkit version");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_config;
  }
  try {
    if (run->parsed()) return cmd_run(config, out, workers);
    if (val->parsed()) return cmd_validate(config);
    std::cout << "fracspde " << fracspde::version << " (config format " << fracspde::config_format_version << ")\n";
    return exit_ok;
  } catch (const fracspde::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numeric;
  }
}
