#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "maxent/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Maximum entropy estimation under moment constraints"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string output_path;
  double epsilon = 0.0;
  long seed = 0;
  std::vector<std::string> overrides;

  for (const char* name : {"solve", "slater", "discrete", "closure", "mdp"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file (key = value, [sections])");
    sub->add_option("--output", output_path, "CSV output path (default stdout)");
    sub->add_option("--epsilon", epsilon, "target accuracy");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--set", overrides, "override KEY=VALUE (repeatable)")->allow_extra_args(false);
  }
  CLI11_PARSE(app, argc, argv);

  maxent::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = maxent::load_config_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw maxent::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
      cfg.settings.assign(kv.substr(0, eq), kv.substr(eq + 1), "--set: ");
    }
    for (auto* sub : app.get_subcommands()) {
      if (sub->count("--epsilon")) {
        std::ostringstream v;
        v.precision(17);
        v << epsilon;
        cfg.settings.assign("epsilon", v.str(), "--epsilon: ");
      }
      if (sub->count("--seed")) cfg.settings.assign("seed", std::to_string(seed), "--seed: ");
      cfg.subcommand = sub->get_name();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return maxent::exit_error;
  }
  cfg.config_path = config_path;
  cfg.output_path = output_path;
  return maxent::run(cfg);
}
