#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "frontlab/commands.hpp"
#include "frontlab/config.hpp"
#include "frontlab/error.hpp"

int main(int argc, char** argv) {
  using namespace frontlab;

  CLI::App app{"Front propagation experiments for cooperative nonlocal dispersal systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string engine;
  bool strict = false;
  std::size_t jobs = 0;

  const char* commands[][2] = {
      {"dispersion", "Tabulate c(lambda) and locate its minimum"},
      {"simulate", "Integrate the system and record snapshots and front traces"},
      {"verify-theorem", "Check that all components spread at c(lambda0)"},
      {"check-assumptions", "Sample the structural hypotheses on the reaction"},
      {"bounds-check", "Residuals of the comparison profiles and sandwich tests"},
      {"sweep", "Measured speed against the smallest decay rate"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (FRONTLAB_OUT overrides)");
    sub->add_option("--engine", engine, "Convolution engine")->check(CLI::IsMember({"fft", "direct"}));
    sub->add_flag("--strict", strict, "Treat a front reaching the domain edge as an error");
    sub->add_option("--jobs", jobs, "Parallel simulations for sweep")->check(CLI::PositiveNumber);
  }

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("FRONTLAB_OUT"); env && *env) out_dir = env;
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig config = load_config(config_path);
    if (!engine.empty()) config.engine = engine_from_string(engine);
    if (strict) config.strict = true;
    if (jobs > 0) config.jobs = jobs;
    const int code = execute(command_from_string(name), config, out_dir);
    std::cout << name << ": " << (code == kExitOk ? "ok" : "negative verdict") << " (" << out_dir << ")\n";
    return code;
  } catch (const Error& e) {
    write_error(out_dir, std::string(to_string(e.kind())), e.what());
    std::cerr << name << ": " << to_string(e.kind()) << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    write_error(out_dir, "Internal", e.what());
    std::cerr << name << ": " << e.what() << '\n';
  }
  return kExitError;
}
