#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svrpo/errors.hpp"
#include "svrpo/experiment.hpp"

namespace svrpo {

namespace {

// ---------------------------------------------------------------------------
// Typed value parsing with the offending key in every message.

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  const long long v = parse_int(key, value);
  if (v < 0) throw ConfigError(key + ": must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(key + ": expected true|false, got '" + value + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value, Parse parse) {
  std::vector<T> out;
  std::istringstream in(value);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(parse(key, tok));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

// ---------------------------------------------------------------------------
// Schema: one row per knob; drives both the CLI11 flags and the config file,
// so anything settable one way is settable the other by construction.

struct Field {
  std::string cli_spec;                // CLI11 option name spec, e.g. "--batch,--N"
  std::vector<std::string> file_keys;  // accepted "key = value" spellings
  std::string help;
  bool boolean = false;  // CLI flag without an argument
  std::function<void(ExperimentConfig&, const std::string&)> apply;
};

std::vector<Field> schema() {
  return {
      {"--algo", {"algo"}, "svrpo|trpo|svrpo-sgd|svrpo-nofisher", false,
       [](ExperimentConfig& c, const std::string& v) { c.algorithm = algorithm_from_name(v); }},
      {"--env", {"env"}, "pointmass|pendulum", false,
       [](ExperimentConfig& c, const std::string& v) { c.env_name = v; }},
      {"--seed", {"seed"}, "single seed", false,
       [](ExperimentConfig& c, const std::string& v) { c.seeds = {parse_u64("seed", v)}; }},
      {"--seeds", {"seeds"}, "comma-separated seed list", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.seeds = parse_list<std::uint64_t>("seeds", v, parse_u64);
       }},
      {"--epochs,--L", {"epochs", "L"}, "outer iterations L", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.epochs = static_cast<int>(parse_int("epochs", v));
       }},
      {"--batch,--N", {"batch", "N"}, "transitions per epoch N", false,
       [](ExperimentConfig& c, const std::string& v) {
         const long long n = parse_int("batch", v);
         if (n < 0) throw ConfigError("batch: N must be positive");
         c.train.n_transitions = static_cast<std::size_t>(n);
       }},
      {"--inner,--J", {"inner", "J"}, "inner iterations J", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.inner_iters = static_cast<int>(parse_int("inner", v));
       }},
      {"--mini,--m", {"mini", "m"}, "minibatch size m", false,
       [](ExperimentConfig& c, const std::string& v) {
         const long long n = parse_int("mini", v);
         if (n < 0) throw ConfigError("mini: m must be positive");
         c.train.minibatch_size = static_cast<std::size_t>(n);
       }},
      {"--nu", {"nu"}, "Fisher subsample ratio", false,
       [](ExperimentConfig& c, const std::string& v) { c.train.nu = parse_double("nu", v); }},
      {"--delta", {"delta"}, "KL trust-region radius", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.line_search.delta = parse_double("delta", v);
       }},
      {"--gamma", {"gamma"}, "discount factor", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.gamma = parse_double("gamma", v);
       }},
      {"--damping", {"damping"}, "Fisher damping", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.damping = parse_double("damping", v);
       }},
      {"--cg-iters,--cg_iters", {"cg_iters", "cg-iters"}, "CG iteration cap", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.cg.max_iters = static_cast<int>(parse_int("cg_iters", v));
       }},
      {"--cg-tol,--cg_tol", {"cg_tol", "cg-tol"}, "CG residual tolerance", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.cg.residual_tol = parse_double("cg_tol", v);
       }},
      {"--backtracks", {"backtracks"}, "max line-search halvings", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.line_search.max_backtracks = static_cast<int>(parse_int("backtracks", v));
       }},
      {"--accept-ratio,--accept_ratio", {"accept_ratio", "accept-ratio"},
       "required fraction of the predicted improvement", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.line_search.accept_ratio = parse_double("accept_ratio", v);
       }},
      {"--hidden", {"hidden"}, "hidden layer sizes, e.g. 32,32", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.hidden_sizes = parse_list<int>("hidden", v, [](const std::string& k,
                                                                const std::string& t) {
           return static_cast<int>(parse_int(k, t));
         });
       }},
      {"--init-log-std,--init_log_std", {"init_log_std", "init-log-std"},
       "initial log standard deviation", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.init_log_std = parse_double("init_log_std", v);
       }},
      {"--horizon", {"horizon"}, "episode horizon (0 = environment default)", false,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.horizon = static_cast<int>(parse_int("horizon", v));
       }},
      {"--out", {"out"}, "output directory", false,
       [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }},
      {"--no-adv-norm", {"no_adv_norm", "no-adv-norm"},
       "disable per-batch advantage standardization", true,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.normalize_advantages = !parse_bool("no_adv_norm", v);
       }},
      {"--dump-trajectories", {"dump_trajectories", "dump-trajectories"},
       "write per-epoch trajectory JSONL files", true,
       [](ExperimentConfig& c, const std::string& v) {
         c.dump_trajectories = parse_bool("dump_trajectories", v);
       }},
      {"--diag-variance,--diag_variance", {"diag_variance", "diag-variance"},
       "record per-epoch SVRG/minibatch variance ratios", true,
       [](ExperimentConfig& c, const std::string& v) {
         c.train.diag_variance = parse_bool("diag_variance", v);
       }},
  };
}

/// Flat "key = value" file, # comments, blank lines; unknown keys error.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not 'key = value': " + stripped);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(line_no));
    entries.emplace_back(key, value);
  }
  return entries;
}

struct ParsedCli {
  ExperimentConfig config;
  bool ran_train = false;
  bool help = false;
};

/// Parses argv; applies defaults, then the config file, then the flags.
ParsedCli parse_cli(int argc, const char* const* argv) {
  CLI::App app{"svrpo: trust-region variance-reduced policy optimization"};
  app.require_subcommand(1);
  CLI::App* train = app.add_subcommand("train", "Run one algorithm on one environment");

  const std::vector<Field> fields = schema();
  std::string config_path;
  train->add_option("--config", config_path, "flat key = value config file");
  std::vector<std::string> flag_values(fields.size());
  std::unique_ptr<bool[]> flag_bools(new bool[fields.size()]());
  std::vector<CLI::Option*> options(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].boolean)
      options[i] = train->add_flag(fields[i].cli_spec, flag_bools[i], fields[i].help);
    else
      options[i] = train->add_option(fields[i].cli_spec, flag_values[i], fields[i].help);
  }

  ParsedCli out;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    out.help = true;
    return out;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    out.help = true;
    return out;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  out.ran_train = train->parsed();
  if (!out.ran_train) return out;

  if (!config_path.empty()) {
    for (const auto& [key, value] : read_config_file(config_path)) {
      const Field* match = nullptr;
      for (const Field& f : fields)
        for (const std::string& k : f.file_keys)
          if (k == key) match = &f;
      if (!match) throw ConfigError("config: unknown key '" + key + "'");
      match->apply(out.config, value);
    }
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (options[i]->count() == 0) continue;
    fields[i].apply(out.config,
                    fields[i].boolean ? (flag_bools[i] ? "true" : "false") : flag_values[i]);
  }
  out.config.validate();
  return out;
}

}  // namespace

ExperimentConfig parse_train_args(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("svrpo");
  for (const std::string& a : args) argv.push_back(a.c_str());
  const ParsedCli parsed = parse_cli(static_cast<int>(argv.size()), argv.data());
  if (!parsed.ran_train || parsed.help)
    throw ConfigError("expected the 'train' subcommand");
  return parsed.config;
}

int run_main(int argc, const char* const* argv) {
  try {
    const ParsedCli parsed = parse_cli(argc, argv);
    if (parsed.help) return 0;
    const ExperimentSummary summary = run_experiment(parsed.config);
    std::cout << "algorithm: " << summary.algorithm << "  env: " << summary.env << '\n';
    for (const SeedSummary& ss : summary.per_seed)
      std::cout << "  seed " << ss.seed << "  final_return " << format_double(ss.final_return)
                << "  auc " << format_double(ss.auc) << '\n';
    std::cout << "median final_return: " << format_double(summary.median_final_return)
              << "\nmedian auc: " << format_double(summary.median_auc)
              << "\nsummary: " << summary.summary_path << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace svrpo
