#include "svrpo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "svrpo/envs.hpp"
#include "svrpo/errors.hpp"

namespace svrpo {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  make_env(env_name, train.horizon);  // throws ConfigError for unknown names
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (out_dir.empty()) throw ConfigError("out: output directory must be non-empty");
  train.validate();
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string records_to_csv(const std::vector<IterationRecord>& records) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const IterationRecord& r : records) {
    out << r.epoch << ',' << r.env_steps_cumulative << ',' << format_double(r.mean_return)
        << ',' << format_double(r.std_return) << ',' << format_double(r.mean_kl) << ','
        << r.accepted_steps << ',' << r.rejected_steps << ',' << format_double(r.grad_norm)
        << ',' << r.wall_ms << '\n';
  }
  return out.str();
}

double median(Vector values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

double learning_curve_auc(const std::vector<IterationRecord>& records) {
  if (records.empty()) return std::nan("");
  double area = 0.0;
  std::size_t prev_steps = 0;
  for (const IterationRecord& r : records) {
    area += r.mean_return * static_cast<double>(r.env_steps_cumulative - prev_steps);
    prev_steps = r.env_steps_cumulative;
  }
  return area / static_cast<double>(records.back().env_steps_cumulative);
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << contents;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::string algo = algorithm_name(config.algorithm);

  // Fail on an unwritable output path before any simulation runs.
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw IoError("out: cannot create directory " + config.out_dir + ": " + ec.message());
  const std::string probe = (fs::path(config.out_dir) / ".write_probe").string();
  write_text_file(probe, "");
  fs::remove(probe, ec);

  ExperimentSummary summary;
  summary.algorithm = algo;
  summary.env = config.env_name;

  const auto env = make_env(config.env_name, config.train.horizon);
  Vector finals, aucs;
  for (const std::uint64_t seed : config.seeds) {
    SvrpoConfig cfg = config.train;
    cfg.seed = seed;
    if (config.dump_trajectories)
      cfg.dump_prefix =
          (fs::path(config.out_dir) / (algo + "_seed" + std::to_string(seed) + "_trajs"))
              .string();
    const TrainResult result = train(config.algorithm, cfg, *env);

    const std::string csv_path =
        (fs::path(config.out_dir) / (algo + "_seed" + std::to_string(seed) + ".csv")).string();
    write_text_file(csv_path, records_to_csv(result.records));
    summary.csv_paths.push_back(csv_path);

    GaussianMlpPolicy final_policy(result.arch);
    final_policy.unflatten(result.final_params);
    checkpoint_policy(final_policy,
                      (fs::path(config.out_dir) / (algo + "_seed" + std::to_string(seed) + ".policy"))
                          .string());

    SeedSummary ss;
    ss.seed = seed;
    ss.final_return = result.records.empty() ? std::nan("") : result.records.back().mean_return;
    ss.auc = learning_curve_auc(result.records);
    summary.per_seed.push_back(ss);
    finals.push_back(ss.final_return);
    aucs.push_back(ss.auc);
  }

  summary.median_final_return = median(finals);
  summary.median_auc = median(aucs);

  nlohmann::json j;
  j["algorithm"] = algo;
  j["env"] = config.env_name;
  j["median_final_return"] = summary.median_final_return;
  j["median_auc"] = summary.median_auc;
  j["per_seed"] = nlohmann::json::array();
  for (const SeedSummary& ss : summary.per_seed)
    j["per_seed"].push_back(
        {{"seed", ss.seed}, {"final_return", ss.final_return}, {"auc", ss.auc}});
  summary.summary_path = (fs::path(config.out_dir) / "summary.json").string();
  write_text_file(summary.summary_path, j.dump(2) + "\n");
  return summary;
}

void checkpoint_policy(const GaussianMlpPolicy& policy, const std::string& path) {
  const PolicyArchitecture& arch = policy.arch();
  std::ostringstream out;
  out << "svrpo-policy v1 obs=" << arch.obs_dim << " act=" << arch.action_dim << " hidden=";
  for (std::size_t i = 0; i < arch.hidden_sizes.size(); ++i) {
    if (i) out << ',';
    out << arch.hidden_sizes[i];
  }
  out << '\n';
  for (const double p : policy.flatten()) out << format_double(p) << '\n';
  write_text_file(path, out.str());
}

GaussianMlpPolicy restore_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw FormatError("checkpoint: empty file");

  PolicyArchitecture arch;
  auto fail = [&](const std::string& why) -> void {
    throw FormatError("checkpoint: malformed header (" + why + "): " + header);
  };
  std::istringstream hs(header);
  std::string magic, version, obs_kv, act_kv, hidden_kv;
  hs >> magic >> version >> obs_kv >> act_kv >> hidden_kv;
  if (magic != "svrpo-policy" || version != "v1") fail("bad magic");
  if (obs_kv.rfind("obs=", 0) != 0 || act_kv.rfind("act=", 0) != 0 ||
      hidden_kv.rfind("hidden=", 0) != 0)
    fail("missing fields");
  try {
    arch.obs_dim = std::stoi(obs_kv.substr(4));
    arch.action_dim = std::stoi(act_kv.substr(4));
    std::istringstream hl(hidden_kv.substr(7));
    std::string tok;
    while (std::getline(hl, tok, ',')) arch.hidden_sizes.push_back(std::stoi(tok));
  } catch (const std::exception&) {
    fail("unparseable dimensions");
  }

  GaussianMlpPolicy policy{[&] {
    try {
      return GaussianMlpPolicy(arch);
    } catch (const ArgumentError& e) {
      throw FormatError(std::string("checkpoint: invalid architecture: ") + e.what());
    }
  }()};

  Vector params;
  params.reserve(policy.param_count());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      std::size_t pos = 0;
      const double v = std::stod(line, &pos);
      if (pos != line.size()) throw std::invalid_argument("trailing characters");
      params.push_back(v);
    } catch (const std::exception&) {
      throw FormatError("checkpoint: unparseable parameter line: " + line);
    }
  }
  if (params.size() != policy.param_count())
    throw FormatError("checkpoint: expected " + std::to_string(policy.param_count()) +
                      " parameters, got " + std::to_string(params.size()));
  policy.unflatten(params);
  return policy;
}

}  // namespace svrpo
