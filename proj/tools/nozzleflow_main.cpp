#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nozzleflow/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Globally subsonic nozzle flow: stream-function solver and "
               "critical mass-flux locator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  for (const auto& name : {"farfield", "solve", "diagnose", "critical", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory override");
  }

  CLI11_PARSE(app, argc, argv);

  nozzleflow::RunConfig cfg;
  try {
    cfg = nozzleflow::parse_config(config_path);
  } catch (const nozzleflow::config_error& e) {
    std::cerr << e.what() << "\n";
    return nozzleflow::kExitError;
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  try {
    return nozzleflow::run_subcommand(app.get_subcommands().front()->get_name(), cfg);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return nozzleflow::kExitError;
  }
}
