#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bosonet/mpo.hpp"

namespace bosonet {

enum class ExperimentKind {
  kLosslessEe,
  kFockEe,
  kLossyEe,
  kAnalyticEe,
  kTruncError,
  kSample,
  kProb,
  kOracleCheck,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);

// Invalid configuration; field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kLosslessEe;
  std::vector<int> modes{8};
  std::vector<int> photons{2};
  LossSpec::Kind loss_kind = LossSpec::Kind::kConstant;
  std::vector<double> mus{1.0};
  std::vector<double> betas{1.0};
  std::vector<double> gammas{1.0};
  std::vector<double> alphas{1.0};
  std::optional<std::size_t> chi_max;
  std::vector<std::size_t> chi_values;  // trunc-error sweep
  std::optional<double> weight_threshold;
  bool reorthogonalize = false;
  bool per_sector = false;  // MPO boundary: one chain per photon sector
  int n_circuits = 1;
  std::optional<std::uint64_t> seed;  // required; no clock default
  std::string output = "out";
  int threads = 1;
  int checkpoint_every = 0;  // blocks; 0 disables
  std::size_t n_samples = 1000;
  std::vector<int> outcome;  // prob: one outcome; empty means all outcomes
  std::optional<std::size_t> max_bond_dimension;  // resource guard
  double oracle_tolerance = 1e-8;
};

// Parses the JSON config surface. Keys missing from the file keep defaults.
ExperimentConfig parse_config(const std::string& json_text);
// Throws ConfigError for inconsistent settings.
void validate(const ExperimentConfig& config);

// Canonical JSON of every field; its FNV-1a hash tags all output rows.
std::string canonical_json(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

struct RunOptions {
  bool resume = false;  // continue from checkpoints found in the output directory
};

struct RunSummary {
  int exit_code = 0;  // 0 ok, 2 numerical/oracle failure, 3 resource abort
  std::string message;
  std::uint64_t config_hash = 0;
  double wall_seconds = 0.0;
};

// Runs the recipe and writes results.csv, summary.csv (where meaningful),
// timing.csv, meta.json and experiment-specific files into config.output.
// Exceptions other than ConfigError are mapped to exit codes.
RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

const char* software_version();

}  // namespace bosonet
