#include <iostream>

#include <CLI11.hpp>

#include "vibeam/commands.hpp"
#include "vibeam/util.hpp"

namespace {

vibeam::Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  vibeam::Config cfg = path.empty() ? vibeam::Config::from_string("")
                                    : vibeam::Config::from_file(path);
  for (const auto& item : overrides) {
    auto pos = item.find('=');
    if (pos == std::string::npos)
      throw vibeam::ValidationError("--set expects key=value, got: " + item);
    cfg.set(vibeam::trim(item.substr(0, pos)), vibeam::trim(item.substr(pos + 1)));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vibro-impact simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "configuration file (key = value lines)");
  app.add_option("--set", overrides, "override a config key, key=value")->take_all();

  auto* reduce = app.add_subcommand("reduce", "build the reduced model archive");
  auto* sweep = app.add_subcommand("sweep", "run stepped-sine frequency sweeps");
  auto* converge = app.add_subcommand("converge", "time-step and mode-count refinement studies");
  auto* analyze = app.add_subcommand("analyze", "derived quantities for stored series");
  auto* update = app.add_subcommand("update", "frequency-matching model updating");

  std::vector<std::string> series_paths;
  analyze->add_option("series", series_paths, "time series CSV files");

  CLI11_PARSE(app, argc, argv);

  try {
    vibeam::Config cfg = load_config(config_path, overrides);
    if (reduce->parsed()) vibeam::cmd_reduce(cfg);
    if (sweep->parsed()) vibeam::cmd_sweep(cfg);
    if (converge->parsed()) vibeam::cmd_converge(cfg);
    if (analyze->parsed()) vibeam::cmd_analyze(cfg, series_paths);
    if (update->parsed()) vibeam::cmd_update(cfg);
  } catch (const vibeam::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const vibeam::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
