#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "vdpsync/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitConvergence = 4;

const char* kind_tag(vdpsync::ErrorKind k) {
  switch (k) {
    case vdpsync::ErrorKind::Config: return "config";
    case vdpsync::ErrorKind::Numerical: return "numerical";
    case vdpsync::ErrorKind::Convergence: return "convergence";
  }
  return "unknown";
}

int exit_code(vdpsync::ErrorKind k) {
  switch (k) {
    case vdpsync::ErrorKind::Config: return kExitConfig;
    case vdpsync::ErrorKind::Numerical: return kExitNumerical;
    case vdpsync::ErrorKind::Convergence: return kExitConvergence;
  }
  return 1;
}

int report(const vdpsync::Error& e) {
  std::cerr << "error kind=" << kind_tag(e.kind()) << " msg=\"" << e.what() << "\"\n";
  return exit_code(e.kind());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven Van der Pol synchronization toolkit"};
  app.require_subcommand(1);

  std::string scenario_dir = VDPSYNC_SCENARIO_DIR;
  app.add_option("--scenario-dir", scenario_dir, "Directory holding bundled scenarios");

  std::string run_file, out_dir = ".";
  int workers = 1;
  auto* run_cmd = app.add_subcommand("run", "Execute a scenario file");
  run_cmd->add_option("scenario", run_file, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (default: current)");
  run_cmd->add_option("--workers", workers, "Worker threads for scan scenarios")
      ->check(CLI::PositiveNumber);

  std::string validate_file;
  auto* val_cmd = app.add_subcommand("validate", "Parse a scenario and echo the resolved config");
  val_cmd->add_option("scenario", validate_file, "Scenario JSON file")->required();

  auto* list_cmd = app.add_subcommand("list", "List bundled scenario files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto s = vdpsync::scenario::parse_scenario(run_file);
      const auto outcome = vdpsync::scenario::run_scenario(s, out_dir, workers);
      std::cout << "wrote " << outcome.outputs.size() << " outputs and "
                << outcome.manifest.string() << "\n";
      return 0;
    }
    if (*val_cmd) {
      const auto s = vdpsync::scenario::parse_scenario(validate_file);
      std::cout << vdpsync::scenario::resolved_config_json(s) << "\n";
      return 0;
    }
    if (*list_cmd) {
      const auto files = vdpsync::scenario::bundled_scenarios(scenario_dir);
      if (files.empty()) {
        std::cerr << "error kind=config msg=\"no scenarios found in " << scenario_dir << "\"\n";
        return kExitConfig;
      }
      for (const auto& f : files) {
        try {
          const auto s = vdpsync::scenario::parse_scenario(f);
          std::printf("%-28s %-20s %s\n", f.filename().string().c_str(),
                      vdpsync::scenario::kind_name(s.kind).c_str(), s.label.c_str());
        } catch (const vdpsync::Error& e) {
          std::printf("%-28s INVALID: %s\n", f.filename().string().c_str(), e.what());
        }
      }
      return 0;
    }
  } catch (const vdpsync::Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error kind=internal msg=\"" << e.what() << "\"\n";
    return 1;
  }
  return 0;
}
