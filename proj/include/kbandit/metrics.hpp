#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kbandit/adversary.hpp"
#include "kbandit/bandit.hpp"
#include "kbandit/errors.hpp"

namespace kbandit {

// Bandit environment on [0,1]: reward_fn plus its known maximum (used for
// pseudo-regret accounting) and the noise scale.
struct Environment {
  std::string id;
  std::function<double(double)> reward_fn;
  double f_star = 0.0;
  double x_star = 0.0;
  double noise_sigma = 0.5;
  std::string space_tag;  // e.g. "matern nu=3/2 B=2" or "sobolev m=1 L=0.28"
  int bins = 0;           // M when the rewards come from an adversary instance, else 0
};

// Validates f_star against the grid maximum of reward_fn (within 1e-6).
Environment make_environment(std::string id, std::function<double(double)> reward_fn,
                             double f_star, double x_star, double noise_sigma,
                             std::string space_tag = "", int bins = 0,
                             int certification_grid = 1 << 14);

// Exact-norm RKHS test function: finite kernel expansion with random centers,
// rescaled so the expansion norm alpha^T K alpha equals B^2 exactly.
struct KernelExpansion {
  KernelSpec spec;
  std::vector<double> centers;
  std::vector<double> coefs;
  double eval(double x) const;
};
KernelExpansion make_kernel_expansion(const KernelSpec& spec, double B, int n_centers,
                                      uint64_t seed);
Environment make_kernel_expansion_env(const KernelSpec& spec, double B, int n_centers,
                                      uint64_t seed, double noise_sigma);

// Environment wrapping reward function phi_s of an instance.
Environment make_adversary_env(const AdversaryInstance& instance, int s, double noise_sigma);

struct RegretTrace {
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<double> cum_regret;     // non-decreasing pseudo-regret
  std::map<int, long> bin_counts;     // bin index -> count; empty when bins = 0
  uint64_t seed = 0;

  double final_regret() const { return cum_regret.empty() ? 0.0 : cum_regret.back(); }
  long bin_count(int s) const {
    auto it = bin_counts.find(s);
    return it == bin_counts.end() ? 0 : it->second;
  }
};

// Runs one episode: x_t from the algorithm, y_t = f(x_t) + sigma xi_t with a
// counter-based Gaussian stream keyed by (env id, seed, t). The trace is a
// pure function of (algorithm config, environment, T, seed).
RegretTrace run_episode(BanditAlgorithm& algo, const Environment& env, long horizon,
                        uint64_t seed);

// OLS of log(regret) on log(T); returns (slope, standard error).
std::pair<double, double> estimate_exponent(const std::vector<double>& horizons,
                                            const std::vector<double>& mean_regrets);

// Exact rational arithmetic over the regret-exponent formulas; nu values are
// half-integers passed as twice their value.
struct Rational {
  long long num = 0;
  long long den = 1;
  Rational() = default;
  Rational(long long n, long long d);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const;
};

Rational minimax_exponent(int twice_nu);                       // (nu+1)/(2nu+1)
Rational lower_exponent(int twice_nu1, int twice_nu2);         // requires nu1 <= nu2
Rational corral_exponent(int twice_nu_tilde, int twice_nu_star);
Rational rbbe_exponent(int twice_nu_star);                     // (1+4nu+2nu^2)/(1+2nu)^2

// String-keyed convenience ("minimax", "lower", "corral", "rbbe") over double
// nu arguments; throws InvalidArgs on bad kinds or non-half-integer input.
double theory_exponents(const std::string& kind, const std::vector<double>& args);

// Trade-off experiment on a certified instance: runs the factory-built
// algorithm on phi_0 and on every phi_s for each seed.
struct TradeoffReport {
  double delta = 0;
  int bins = 0;
  double r_tilde_measured = 0;                  // mean regret on phi_0
  std::vector<double> mean_regret_s;            // per s = 1..M
  std::vector<double> mean_bin_count_on_phi0;   // E_0[N_{H_s}(T)], s = 1..M
  double mean_over_s_regret = 0;
  double bound_rhs = 0;                         // (Delta T / 2)(1/2 - sqrt(Delta R~_meas / M))
  bool accounting_ok = true;                    // R_{T,s} >= (Delta/2)(T - N_{H_s}) per trace
  double worst_accounting_slack = 0;            // min over traces of lhs - rhs
};

using TradeoffAlgoFactory = std::function<std::unique_ptr<BanditAlgorithm>(long horizon)>;

TradeoffReport tradeoff_experiment(const AdversaryInstance& instance,
                                   const TradeoffAlgoFactory& factory, long horizon,
                                   const std::vector<uint64_t>& seeds, double noise_sigma = 0.5,
                                   int workers = 1);

// Bounded worker pool over [0, n); results must be written to caller-owned
// slots for deterministic aggregation.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace kbandit
