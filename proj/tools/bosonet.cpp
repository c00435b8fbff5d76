// Command-line driver: bosonet <experiment> --config FILE [--seed S] [--chi X] [--out DIR]
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bosonet/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Tensor-network boson sampling experiments"};
  app.set_version_flag("--version", bosonet::software_version());

  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> chi;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool resume = false;

  app.add_option("experiment", experiment,
                 "lossless-ee | fock-ee | lossy-ee | analytic-ee | trunc-error | sample | prob | oracle-check")
      ->required();
  app.add_option("--config,-c", config_path, "JSON configuration file");
  app.add_option("--seed,-s", seed, "Master seed (overrides the file)");
  app.add_option("--chi", chi, "Maximum bond dimension (overrides the file)");
  app.add_option("--out,-o", out, "Output directory (overrides the file)");
  app.add_option("--threads,-j", threads, "Worker threads (overrides the file)");
  app.add_flag("--resume", resume, "Continue from checkpoints in the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const auto kind = bosonet::parse_experiment_kind(experiment);
  if (!kind) {
    std::cerr << "error: unknown experiment '" << experiment << "'\n";
    return 1;
  }

  try {
    std::string text = "{}";
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot read config file " << config_path << "\n";
        return 1;
      }
      std::ostringstream buf;
      buf << in.rdbuf();
      text = buf.str();
    }
    bosonet::ExperimentConfig config = bosonet::parse_config(text);
    // Precedence: flags > file > defaults.
    config.experiment = *kind;
    if (seed) config.seed = *seed;
    if (chi) config.chi_max = *chi;
    if (out) config.output = *out;
    if (threads) config.threads = *threads;

    bosonet::RunOptions options;
    options.resume = resume;
    const auto summary = bosonet::run_experiment(config, options, std::cout);
    return summary.exit_code;
  } catch (const bosonet::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
