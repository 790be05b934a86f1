#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svrpo/policy.hpp"
#include "svrpo/trustopt.hpp"

namespace svrpo {

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::svrpo;
  std::string env_name = "pointmass";
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "out";
  bool dump_trajectories = false;
  SvrpoConfig train;

  void validate() const;  // throws ConfigError naming the offending key
};

/// Fixed telemetry schema; tests pin this string verbatim.
inline constexpr const char* kCsvHeader =
    "epoch,env_steps,mean_return,std_return,mean_kl,accepted,rejected,grad_norm,wall_ms";

/// 17 significant digits: enough for exact double round-trips.
std::string format_double(double x);

std::string records_to_csv(const std::vector<IterationRecord>& records);

struct SeedSummary {
  std::uint64_t seed = 0;
  double final_return = 0.0;
  /// Step-weighted average of mean_return over the learning curve
  /// (normalized area under the curve).
  double auc = 0.0;
};

struct ExperimentSummary {
  std::string algorithm;
  std::string env;
  std::vector<SeedSummary> per_seed;
  double median_final_return = 0.0;
  double median_auc = 0.0;
  std::vector<std::string> csv_paths;
  std::string summary_path;
};

/// Middle order statistic (mean of the two middle values for even sizes);
/// NaN for empty input.
double median(Vector values);

/// Runs the configured algorithm once per seed. Writes one CSV per
/// (algorithm, seed), a final policy checkpoint per seed, and summary.json.
/// Output-path problems surface as IoError before any simulation starts.
ExperimentSummary run_experiment(const ExperimentConfig& config);

/// Text checkpoint: header "svrpo-policy v1 obs=<d> act=<d> hidden=<...>"
/// followed by one parameter per line in flatten order. Round-trips exactly.
void checkpoint_policy(const GaussianMlpPolicy& policy, const std::string& path);
GaussianMlpPolicy restore_policy(const std::string& path);

/// Parses `train` subcommand arguments (argv without the program name, e.g.
/// {"train", "--algo", "svrpo"}). File values come from --config; flags
/// override the file; unknown keys are errors.
ExperimentConfig parse_train_args(const std::vector<std::string>& args);

/// Full CLI entry point: 0 on success, 2 on configuration errors,
/// 3 on numerical errors, 1 otherwise.
int run_main(int argc, const char* const* argv);

}  // namespace svrpo
