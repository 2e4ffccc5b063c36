#pragma once

#include <string>
#include <vector>

#include "kbandit/bandit.hpp"
#include "kbandit/metrics.hpp"

namespace kbandit {

// Flat sectioned key=value experiment description. '#' starts a comment;
// [experiment] / [env] / [algo] introduce sections; env and algo sections
// repeat.
struct EnvSpec {
  std::string id;
  std::string type = "kernel_expansion";  // kernel_expansion | adversary
  double nu = 1.5;
  double B = 2.0;
  double lengthscale = 0.0;
  int n_centers = 12;
  uint64_t fn_seed = 1;
  std::string file;  // adversary instance artifact
  int phi = 0;       // which reward function of the instance
  double noise_sigma = 0.5;

  bool operator==(const EnvSpec&) const = default;
};

struct AlgoSpec {
  std::string id;
  std::string type = "supkernelucb";  // gpucb | supkernelucb | corral | rbbe
  AlgoConfig base;
  bool doubling = false;
  // master-specific
  double nu_tilde = 1.5;
  std::vector<std::pair<double, double>> candidate_grid;  // (nu_i, B_i), nested
  double reward_min = -1.0;
  double reward_max = 1.0;
  double eta_override = 0.0;
  double bound_scale = 1.0;

  bool operator==(const AlgoSpec&) const;
};

struct ExperimentConfig {
  std::string id = "experiment";
  uint64_t seed_base = 1;
  int replicates = 1;
  std::vector<long> horizons;  // strictly increasing
  std::string output_dir = "out";
  int workers = 1;
  bool write_traces = false;
  std::vector<EnvSpec> envs;
  std::vector<AlgoSpec> algos;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError with line/field diagnostics.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

// "3/2" or "1.5"
double parse_rational(const std::string& text);

Environment build_environment(const EnvSpec& spec);
std::unique_ptr<BanditAlgorithm> build_algorithm(const AlgoSpec& spec, long horizon,
                                                 uint64_t seed);

struct SummaryRow {
  std::string env_id;
  std::string algo_id;
  long horizon = 0;
  uint64_t seed = 0;
  double final_regret = 0.0;
  double slope = 0.0;      // per (env, algo) log-log fit; NaN when < 4 horizons
  double slope_se = 0.0;
};

struct ExperimentResult {
  std::vector<SummaryRow> rows;
  std::string summary_csv_path;
};

// Executes the full sweep (envs x algos x horizons x replicates) on a bounded
// worker pool and writes summary (and optional per-trace) CSVs in
// deterministic order. Byte-identical outputs for identical configs.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string summary_to_csv(const std::vector<SummaryRow>& rows);
std::string trace_to_csv(const RegretTrace& trace, const Environment& env);

}  // namespace kbandit
