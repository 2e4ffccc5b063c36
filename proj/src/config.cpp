#include "kbandit/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "kbandit/base_algorithms.hpp"
#include "kbandit/model_selection.hpp"
#include "kbandit/rng.hpp"

namespace kbandit {

bool AlgoSpec::operator==(const AlgoSpec& o) const {
  return id == o.id && type == o.type && base.nu_input == o.base.nu_input &&
         base.B_input == o.base.B_input && base.grid_size == o.base.grid_size &&
         base.delta == o.base.delta && base.ucb_scale == o.base.ucb_scale &&
         base.lambda == o.base.lambda && base.lengthscale == o.base.lengthscale &&
         doubling == o.doubling && nu_tilde == o.nu_tilde && candidate_grid == o.candidate_grid &&
         reward_min == o.reward_min && reward_max == o.reward_max &&
         eta_override == o.eta_override && bound_scale == o.bound_scale;
}

double parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
    }
    return std::stod(text);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + text + "'");
  }
}

namespace {

std::vector<std::pair<double, double>> parse_candidate_grid(const std::string& text,
                                                            long line_no) {
  // "1/2:1,3/2:2,5/2:4"
  std::vector<std::pair<double, double>> grid;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": candidate '" + item +
                        "' must look like nu:B");
    }
    grid.emplace_back(parse_rational(item.substr(0, colon)),
                      parse_rational(item.substr(colon + 1)));
  }
  if (grid.empty()) {
    throw ConfigError("line " + std::to_string(line_no) + ": empty candidate grid");
  }
  return grid;
}

std::vector<long> parse_horizons(const std::string& text, long line_no) {
  std::vector<long> horizons;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) horizons.push_back(std::stol(item));
  for (size_t i = 1; i < horizons.size(); ++i) {
    if (horizons[i] <= horizons[i - 1]) {
      throw ConfigError("line " + std::to_string(line_no) + ": horizons must be strictly increasing");
    }
  }
  if (horizons.empty()) {
    throw ConfigError("line " + std::to_string(line_no) + ": empty horizons list");
  }
  return horizons;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  long line_no = 0;
  bool saw_experiment = false;

  auto fail = [&](const std::string& msg) {
    throw ConfigError("line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section == "experiment") {
        if (saw_experiment) fail("duplicate [experiment] section");
        saw_experiment = true;
      } else if (section == "env") {
        cfg.envs.emplace_back();
      } else if (section == "algo") {
        cfg.algos.emplace_back();
      } else {
        fail("unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' outside any section");

    try {
      if (section == "experiment") {
        if (key == "id") cfg.id = val;
        else if (key == "seed_base") cfg.seed_base = std::stoull(val);
        else if (key == "replicates") cfg.replicates = std::stoi(val);
        else if (key == "horizons") cfg.horizons = parse_horizons(val, line_no);
        else if (key == "output_dir") cfg.output_dir = val;
        else if (key == "workers") cfg.workers = std::stoi(val);
        else if (key == "write_traces") cfg.write_traces = std::stoi(val) != 0;
        else fail("unknown experiment key '" + key + "'");
      } else if (section == "env") {
        auto& env = cfg.envs.back();
        if (key == "id") env.id = val;
        else if (key == "type") env.type = val;
        else if (key == "nu") env.nu = parse_rational(val);
        else if (key == "B") env.B = parse_rational(val);
        else if (key == "lengthscale") env.lengthscale = std::stod(val);
        else if (key == "n_centers") env.n_centers = std::stoi(val);
        else if (key == "fn_seed") env.fn_seed = std::stoull(val);
        else if (key == "file") env.file = val;
        else if (key == "phi") env.phi = std::stoi(val);
        else if (key == "noise_sigma") env.noise_sigma = std::stod(val);
        else fail("unknown env key '" + key + "'");
      } else {  // algo
        auto& algo = cfg.algos.back();
        if (key == "id") algo.id = val;
        else if (key == "type") algo.type = val;
        else if (key == "nu") algo.base.nu_input = parse_rational(val);
        else if (key == "B") algo.base.B_input = parse_rational(val);
        else if (key == "grid_size") algo.base.grid_size = std::stoi(val);
        else if (key == "delta") algo.base.delta = std::stod(val);
        else if (key == "ucb_scale") algo.base.ucb_scale = std::stod(val);
        else if (key == "lambda") algo.base.lambda = std::stod(val);
        else if (key == "lengthscale") algo.base.lengthscale = std::stod(val);
        else if (key == "doubling") algo.doubling = std::stoi(val) != 0;
        else if (key == "nu_tilde") algo.nu_tilde = parse_rational(val);
        else if (key == "grid") algo.candidate_grid = parse_candidate_grid(val, line_no);
        else if (key == "reward_min") algo.reward_min = std::stod(val);
        else if (key == "reward_max") algo.reward_max = std::stod(val);
        else if (key == "eta_override") algo.eta_override = std::stod(val);
        else if (key == "bound_scale") algo.bound_scale = std::stod(val);
        else fail("unknown algo key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(std::string("bad value for '") + key + "': " + e.what());
    }
  }

  if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (cfg.horizons.empty()) throw ConfigError("no horizons configured");
  if (cfg.envs.empty()) throw ConfigError("no [env] sections");
  if (cfg.algos.empty()) throw ConfigError("no [algo] sections");
  for (const auto& e : cfg.envs) {
    if (e.id.empty()) throw ConfigError("every env needs an id");
  }
  for (const auto& a : cfg.algos) {
    if (a.id.empty()) throw ConfigError("every algo needs an id");
    if ((a.type == "corral" || a.type == "rbbe") && a.candidate_grid.empty()) {
      throw ConfigError("algo '" + a.id + "': masters need a candidate grid");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

namespace {

void put(std::string& out, const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s=%.17g\n", key, v);
  out += buf;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  out += "[experiment]\n";
  out += "id=" + cfg.id + "\n";
  out += "seed_base=" + std::to_string(cfg.seed_base) + "\n";
  out += "replicates=" + std::to_string(cfg.replicates) + "\n";
  out += "horizons=";
  for (size_t i = 0; i < cfg.horizons.size(); ++i) {
    out += (i ? "," : "") + std::to_string(cfg.horizons[i]);
  }
  out += "\n";
  out += "output_dir=" + cfg.output_dir + "\n";
  out += "workers=" + std::to_string(cfg.workers) + "\n";
  out += "write_traces=" + std::to_string(cfg.write_traces ? 1 : 0) + "\n";
  for (const auto& e : cfg.envs) {
    out += "\n[env]\n";
    out += "id=" + e.id + "\n";
    out += "type=" + e.type + "\n";
    if (e.type == "adversary") {
      out += "file=" + e.file + "\n";
      out += "phi=" + std::to_string(e.phi) + "\n";
    } else {
      put(out, "nu", e.nu);
      put(out, "B", e.B);
      if (e.lengthscale > 0) put(out, "lengthscale", e.lengthscale);
      out += "n_centers=" + std::to_string(e.n_centers) + "\n";
      out += "fn_seed=" + std::to_string(e.fn_seed) + "\n";
    }
    put(out, "noise_sigma", e.noise_sigma);
  }
  for (const auto& a : cfg.algos) {
    out += "\n[algo]\n";
    out += "id=" + a.id + "\n";
    out += "type=" + a.type + "\n";
    put(out, "nu", a.base.nu_input);
    put(out, "B", a.base.B_input);
    out += "grid_size=" + std::to_string(a.base.grid_size) + "\n";
    put(out, "delta", a.base.delta);
    put(out, "ucb_scale", a.base.ucb_scale);
    put(out, "lambda", a.base.lambda);
    if (a.base.lengthscale > 0) put(out, "lengthscale", a.base.lengthscale);
    out += "doubling=" + std::to_string(a.doubling ? 1 : 0) + "\n";
    if (a.type == "corral" || a.type == "rbbe") {
      put(out, "nu_tilde", a.nu_tilde);
      out += "grid=";
      for (size_t i = 0; i < a.candidate_grid.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s%.17g:%.17g", i ? "," : "",
                      a.candidate_grid[i].first, a.candidate_grid[i].second);
        out += buf;
      }
      out += "\n";
      put(out, "reward_min", a.reward_min);
      put(out, "reward_max", a.reward_max);
      if (a.eta_override > 0) put(out, "eta_override", a.eta_override);
      put(out, "bound_scale", a.bound_scale);
    }
  }
  return out;
}

Environment build_environment(const EnvSpec& spec) {
  if (spec.type == "kernel_expansion") {
    const auto kernel = KernelSpec::matern(spec.nu, spec.lengthscale);
    auto env = make_kernel_expansion_env(kernel, spec.B, spec.n_centers, spec.fn_seed,
                                         spec.noise_sigma);
    env.id = spec.id;
    return env;
  }
  if (spec.type == "adversary") {
    auto inst = import_instance(spec.file);
    if (!inst.certified) {
      verify_conditions(inst, 1 << 14);
      if (!inst.certified) throw UncertifiedInstance("instance in " + spec.file);
    }
    auto env = make_adversary_env(inst, spec.phi, spec.noise_sigma);
    env.id = spec.id;
    return env;
  }
  throw ConfigError("unknown env type '" + spec.type + "'");
}

namespace {

std::unique_ptr<BanditAlgorithm> build_base(const std::string& type, const AlgoConfig& cfg,
                                            long horizon, bool doubling) {
  if (type == "gpucb") {
    if (doubling) {
      return std::make_unique<DoublingWrapper>(
          [cfg](long) { return std::make_unique<GpUcb>(cfg); }, horizon);
    }
    return std::make_unique<GpUcb>(cfg);
  }
  if (type == "supkernelucb") {
    if (doubling) {
      return std::make_unique<DoublingWrapper>(
          [cfg](long epoch_len) { return std::make_unique<SupKernelUcb>(cfg, epoch_len); },
          horizon);
    }
    return std::make_unique<SupKernelUcb>(cfg, std::max<long>(horizon, 2));
  }
  throw ConfigError("unknown base algorithm type '" + type + "'");
}

std::vector<std::unique_ptr<BanditAlgorithm>> build_candidate_bases(const AlgoSpec& spec,
                                                                    long horizon) {
  // masters wrap doubling SupKernelUCB bases: anytime behavior at a constant
  // factor
  std::vector<std::unique_ptr<BanditAlgorithm>> bases;
  for (const auto& [nu_i, b_i] : spec.candidate_grid) {
    AlgoConfig cfg = spec.base;
    cfg.nu_input = nu_i;
    cfg.B_input = b_i;
    cfg.lengthscale = 0.0;  // each base uses its own sqrt(2 nu_i)
    bases.push_back(build_base("supkernelucb", cfg, horizon, /*doubling=*/true));
  }
  return bases;
}

}  // namespace

std::unique_ptr<BanditAlgorithm> build_algorithm(const AlgoSpec& spec, long horizon,
                                                 uint64_t seed) {
  if (spec.type == "gpucb" || spec.type == "supkernelucb") {
    return build_base(spec.type, spec.base, horizon, spec.doubling);
  }
  if (spec.type == "corral") {
    return std::make_unique<CorralMaster>(build_candidate_bases(spec, horizon), spec.nu_tilde,
                                          horizon, seed, spec.reward_min, spec.reward_max,
                                          spec.eta_override);
  }
  if (spec.type == "rbbe") {
    return std::make_unique<RbbeMaster>(build_candidate_bases(spec, horizon),
                                        spec.candidate_grid, spec.base.delta, spec.bound_scale);
  }
  throw ConfigError("unknown algo type '" + spec.type + "'");
}

std::string trace_to_csv(const RegretTrace& trace, const Environment& env) {
  std::string out = "t,x,y,regret_cum,bin\n";
  char buf[160];
  for (size_t i = 0; i < trace.actions.size(); ++i) {
    const int bin = env.bins > 0 ? [&] {
      const double x = trace.actions[i];
      if (x >= 0.5) return 0;
      const double h = 0.5 / env.bins;
      return std::min(std::max(1 + static_cast<int>(std::floor(x / h)), 1), env.bins);
    }() : -1;
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%d\n", i + 1, trace.actions[i],
                  trace.rewards[i], trace.cum_regret[i], bin);
    out += buf;
  }
  return out;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "env_id,algo_id,T,seed,final_regret,slope,stderr\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%ld,%llu,%.17g,%.17g,%.17g\n", r.env_id.c_str(),
                  r.algo_id.c_str(), r.horizon, static_cast<unsigned long long>(r.seed),
                  r.final_regret, r.slope, r.slope_se);
    out += buf;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);

  struct Cell {
    int env_i, algo_i, horizon_i, rep;
  };
  std::vector<Cell> cells;
  for (int e = 0; e < static_cast<int>(cfg.envs.size()); ++e) {
    for (int a = 0; a < static_cast<int>(cfg.algos.size()); ++a) {
      for (int h = 0; h < static_cast<int>(cfg.horizons.size()); ++h) {
        for (int r = 0; r < cfg.replicates; ++r) cells.push_back({e, a, h, r});
      }
    }
  }

  // environments are shared read-only across workers
  std::vector<Environment> envs;
  envs.reserve(cfg.envs.size());
  for (const auto& spec : cfg.envs) envs.push_back(build_environment(spec));

  std::vector<double> final_regret(cells.size(), 0.0);
  std::vector<std::string> trace_csv(cfg.write_traces ? cells.size() : 0);

  parallel_for(static_cast<int>(cells.size()), cfg.workers, [&](int idx) {
    const Cell& c = cells[idx];
    const long horizon = cfg.horizons[c.horizon_i];
    const uint64_t seed = cfg.seed_base + static_cast<uint64_t>(c.rep);
    auto algo = build_algorithm(cfg.algos[c.algo_i], horizon,
                                mix_key(hash_id(cfg.algos[c.algo_i].id), seed));
    const auto trace = run_episode(*algo, envs[c.env_i], horizon, seed);
    final_regret[idx] = trace.final_regret();
    if (cfg.write_traces) trace_csv[idx] = trace_to_csv(trace, envs[c.env_i]);
  });

  // per (env, algo): mean regrets across replicates, then the log-log fit
  const int nh = static_cast<int>(cfg.horizons.size());
  std::map<std::pair<int, int>, std::pair<double, double>> fits;
  for (int e = 0; e < static_cast<int>(cfg.envs.size()); ++e) {
    for (int a = 0; a < static_cast<int>(cfg.algos.size()); ++a) {
      std::vector<double> means(nh, 0.0), horizons(nh);
      for (int h = 0; h < nh; ++h) horizons[h] = static_cast<double>(cfg.horizons[h]);
      for (size_t idx = 0; idx < cells.size(); ++idx) {
        const Cell& c = cells[idx];
        if (c.env_i == e && c.algo_i == a) {
          means[c.horizon_i] += final_regret[idx] / cfg.replicates;
        }
      }
      std::pair<double, double> fit{std::nan(""), std::nan("")};
      if (nh >= 4) {
        try {
          fit = estimate_exponent(horizons, means);
        } catch (const DegenerateFit&) {
          // leave NaN: some regret was zero
        }
      }
      fits[{e, a}] = fit;
    }
  }

  ExperimentResult result;
  for (size_t idx = 0; idx < cells.size(); ++idx) {
    const Cell& c = cells[idx];
    SummaryRow row;
    row.env_id = cfg.envs[c.env_i].id;
    row.algo_id = cfg.algos[c.algo_i].id;
    row.horizon = cfg.horizons[c.horizon_i];
    row.seed = cfg.seed_base + static_cast<uint64_t>(c.rep);
    row.final_regret = final_regret[idx];
    row.slope = fits[{c.env_i, c.algo_i}].first;
    row.slope_se = fits[{c.env_i, c.algo_i}].second;
    result.rows.push_back(row);
    if (cfg.write_traces) {
      char name[256];
      std::snprintf(name, sizeof(name), "%s/trace_%s_%s_T%ld_r%d.csv", cfg.output_dir.c_str(),
                    row.env_id.c_str(), row.algo_id.c_str(), row.horizon, c.rep);
      std::ofstream out(name);
      out << trace_csv[idx];
    }
  }

  result.summary_csv_path = cfg.output_dir + "/summary_" + cfg.id + ".csv";
  std::ofstream out(result.summary_csv_path);
  if (!out) throw ConfigError("cannot write " + result.summary_csv_path);
  out << summary_to_csv(result.rows);
  return result;
}

}  // namespace kbandit
