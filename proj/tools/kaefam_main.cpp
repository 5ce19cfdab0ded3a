#include "kaefam/runner.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Fiberwise twisted Kahler-Einstein laboratory on torus fibrations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file")->required();
    cmd->add_option("--out", out_dir, "output directory (default: from config)");
    cmd->add_option("--override", overrides,
                    "dotted-path config override, e.g. solver.tol=1e-10");
  };

  for (const char* name : {"solve", "verify", "sweep", "bergman"})
    add_common(app.add_subcommand(
        name, std::string("run the ") + name + " pipeline over the configured family"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kaefam::kExitConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const auto start = std::chrono::steady_clock::now();
    kaefam::LoadedConfig lc = kaefam::load_config_file(config_path, overrides);
    kaefam::RunResult result = kaefam::run_experiment(lc, command);
    const std::string dir = out_dir.empty() ? lc.config.output.directory : out_dir;
    result.bundle.write_to(dir);
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start);
    std::cout << result.status << " (" << result.bundle.files.size() << " files -> "
              << dir << ", " << elapsed.count() << " s)\n";
    return result.exit_code;
  } catch (const kaefam::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kaefam::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kaefam::kExitNumericalFailure;
  }
}
