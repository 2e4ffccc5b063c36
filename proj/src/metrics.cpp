#include "kbandit/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include "kbandit/regression.hpp"
#include "kbandit/rng.hpp"

namespace kbandit {

Environment make_environment(std::string id, std::function<double(double)> reward_fn,
                             double f_star, double x_star, double noise_sigma,
                             std::string space_tag, int bins, int certification_grid) {
  double grid_max = -1e300;
  for (int i = 0; i <= certification_grid; ++i) {
    grid_max = std::max(grid_max, reward_fn(static_cast<double>(i) / certification_grid));
  }
  if (std::abs(grid_max - f_star) > 1e-6) {
    throw InvalidArgs("declared f_star " + std::to_string(f_star) +
                      " disagrees with grid max " + std::to_string(grid_max));
  }
  Environment env;
  env.id = std::move(id);
  env.reward_fn = std::move(reward_fn);
  env.f_star = f_star;
  env.x_star = x_star;
  env.noise_sigma = noise_sigma;
  env.space_tag = std::move(space_tag);
  env.bins = bins;
  return env;
}

double KernelExpansion::eval(double x) const {
  double v = 0.0;
  for (size_t i = 0; i < centers.size(); ++i) {
    v += coefs[i] * matern_eval(spec, std::abs(x - centers[i]));
  }
  return v;
}

KernelExpansion make_kernel_expansion(const KernelSpec& spec, double B, int n_centers,
                                      uint64_t seed) {
  if (n_centers < 1) throw InvalidArgs("need at least one center");
  CounterRng rng(mix_key(hash_id("kernel-expansion"), seed));
  std::vector<double> centers(n_centers), weights(n_centers);
  for (auto& c : centers) c = rng.uniform01();
  for (auto& w : weights) w = 2.0 * rng.uniform01() - 1.0;

  // rescale so the expansion norm alpha^T K alpha equals B^2 exactly
  const Eigen::MatrixXd gram = gram_matrix(spec, centers);
  Eigen::VectorXd alpha = Eigen::Map<Eigen::VectorXd>(weights.data(), n_centers);
  const double norm2 = alpha.dot(gram * alpha);
  if (norm2 <= 0.0) throw InvalidArgs("degenerate expansion");
  alpha *= B / std::sqrt(norm2);

  KernelExpansion fn;
  fn.spec = spec;
  fn.centers = std::move(centers);
  fn.coefs.assign(alpha.data(), alpha.data() + n_centers);
  return fn;
}

Environment make_kernel_expansion_env(const KernelSpec& spec, double B, int n_centers,
                                      uint64_t seed, double noise_sigma) {
  const KernelExpansion fn = make_kernel_expansion(spec, B, n_centers, seed);
  auto f = [fn](double x) { return fn.eval(x); };

  // the declared maximum is the certification-grid maximum; rough kernels
  // (nu = 1/2) have cusp peaks that no off-grid polish could certify to 1e-6
  const int g = 1 << 14;
  double x_star = 0.0, f_star = -1e300;
  for (int i = 0; i <= g; ++i) {
    const double x = static_cast<double>(i) / g;
    const double v = f(x);
    if (v > f_star) {
      f_star = v;
      x_star = x;
    }
  }

  char tag[96];
  std::snprintf(tag, sizeof(tag), "matern nu=%g B=%g centers=%d", spec.nu(), B, n_centers);
  char id[96];
  std::snprintf(id, sizeof(id), "kexp-nu%d2-B%g-n%d-s%llu", spec.twice_nu, B, n_centers,
                static_cast<unsigned long long>(seed));
  return make_environment(id, f, f_star, x_star, noise_sigma, tag);
}

Environment make_adversary_env(const AdversaryInstance& instance, int s, double noise_sigma) {
  if (!instance.certified) {
    throw UncertifiedInstance("adversary environment needs a certified instance");
  }
  if (s < 0 || s > instance.num_bins()) throw InvalidArgs("phi index out of range");
  AdversaryInstance copy = instance;
  auto f = [copy, s](double x) { return copy.phi(s, x); };
  char id[64];
  std::snprintf(id, sizeof(id), "adversary-phi%d-M%d", s, instance.num_bins());
  char tag[96];
  std::snprintf(tag, sizeof(tag), "sobolev m1=%d m2=%d Delta=%g", instance.params.m1,
                instance.params.m2, instance.params.delta);
  Environment env;
  env.id = id;
  env.reward_fn = f;
  env.f_star = instance.peak(s);
  env.x_star = instance.bin_mid(s);
  env.noise_sigma = noise_sigma;
  env.space_tag = tag;
  env.bins = instance.num_bins();
  return env;
}

namespace {

int bin_index(double x, int bins) {
  if (x >= 0.5) return 0;
  const double h = 0.5 / bins;
  const int s = 1 + static_cast<int>(std::floor(x / h));
  return std::min(std::max(s, 1), bins);
}

}  // namespace

RegretTrace run_episode(BanditAlgorithm& algo, const Environment& env, long horizon,
                        uint64_t seed) {
  if (horizon < 1) throw InvalidArgs("horizon must be >= 1");
  RegretTrace trace;
  trace.seed = seed;
  trace.actions.reserve(horizon);
  trace.rewards.reserve(horizon);
  trace.cum_regret.reserve(horizon);
  const uint64_t key = mix_key(hash_id(env.id), seed);
  double cum = 0.0;
  for (long t = 1; t <= horizon; ++t) {
    const double x = algo.select_action(t);
    const double noise = env.noise_sigma > 0.0 ? env.noise_sigma * gaussian_at(key, t) : 0.0;
    const double y = env.reward_fn(x) + noise;
    algo.observe(x, y);
    trace.actions.push_back(x);
    trace.rewards.push_back(y);
    cum += std::max(0.0, env.f_star - env.reward_fn(x));
    trace.cum_regret.push_back(cum);
    if (env.bins > 0) ++trace.bin_counts[bin_index(x, env.bins)];
  }
  return trace;
}

std::pair<double, double> estimate_exponent(const std::vector<double>& horizons,
                                            const std::vector<double>& mean_regrets) {
  if (horizons.size() != mean_regrets.size()) throw InvalidArgs("size mismatch");
  if (horizons.size() < 4) throw InvalidArgs("need at least 4 horizons");
  const int n = static_cast<int>(horizons.size());
  for (double r : mean_regrets) {
    if (!(r > 0.0)) throw DegenerateFit("regret must be positive for a log-log fit");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(horizons[i]);
    const double y = std::log(mean_regrets[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double sxx_c = sxx - sx * sx / n;
  const double slope = (sxy - sx * sy / n) / sxx_c;
  const double intercept = (sy - slope * sx) / n;
  double ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double resid = std::log(mean_regrets[i]) - (intercept + slope * std::log(horizons[i]));
    ssr += resid * resid;
  }
  const double slope_se = n > 2 ? std::sqrt(ssr / (n - 2) / sxx_c) : 0.0;
  return {slope, slope_se};
}

namespace {

long long gcd_ll(long long a, long long b) {
  while (b != 0) {
    const long long t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

}  // namespace

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw InvalidArgs("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = gcd_ll(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

bool Rational::operator<(const Rational& o) const {
  return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
}

namespace {

void require_half_integer(int twice_nu) {
  if (twice_nu < 1 || twice_nu % 2 == 0) {
    throw InvalidArgs("nu must be a positive half-integer (odd twice-value), got " +
                      std::to_string(twice_nu) + "/2");
  }
}

int to_twice_nu(double nu) {
  const double t = 2.0 * nu;
  const int k = static_cast<int>(std::lround(t));
  if (std::abs(t - k) > 1e-9) {
    throw InvalidArgs("nu must be half-integer, got " + std::to_string(nu));
  }
  return k;
}

}  // namespace

Rational minimax_exponent(int k) {
  require_half_integer(k);
  // (nu+1)/(2nu+1) with nu = k/2
  return Rational(k + 2, 2 * (k + 1));
}

Rational lower_exponent(int k1, int k2) {
  require_half_integer(k1);
  require_half_integer(k2);
  if (k1 > k2) throw InvalidArgs("lower exponent requires nu1 <= nu2");
  // (nu1 nu2 + 2 nu2 + 1) / ((nu1+1)(2 nu2+1))
  return Rational(static_cast<long long>(k1) * k2 + 4 * k2 + 4, 2LL * (k1 + 2) * (k2 + 1));
}

Rational corral_exponent(int k_tilde, int k_star) {
  require_half_integer(k_tilde);
  require_half_integer(k_star);
  const Rational first(k_tilde + 2, 2 * (k_tilde + 1));
  const Rational second(4LL + 4 * k_tilde + static_cast<long long>(k_tilde) * k_star,
                        2LL * (1 + k_tilde) * (2 + k_star));
  return first < second ? second : first;
}

Rational rbbe_exponent(int k) {
  require_half_integer(k);
  // (1 + 4 nu + 2 nu^2) / (1 + 2 nu)^2
  return Rational(static_cast<long long>(k) * k + 4 * k + 2, 2LL * (1 + k) * (1 + k));
}

double theory_exponents(const std::string& kind, const std::vector<double>& args) {
  if (kind == "minimax") {
    if (args.size() != 1) throw InvalidArgs("minimax takes one nu");
    return minimax_exponent(to_twice_nu(args[0])).value();
  }
  if (kind == "lower") {
    if (args.size() != 2) throw InvalidArgs("lower takes (nu1, nu2)");
    return lower_exponent(to_twice_nu(args[0]), to_twice_nu(args[1])).value();
  }
  if (kind == "corral") {
    if (args.size() != 2) throw InvalidArgs("corral takes (nu_tilde, nu_star)");
    return corral_exponent(to_twice_nu(args[0]), to_twice_nu(args[1])).value();
  }
  if (kind == "rbbe") {
    if (args.size() != 1) throw InvalidArgs("rbbe takes one nu");
    return rbbe_exponent(to_twice_nu(args[0])).value();
  }
  throw InvalidArgs("unknown exponent kind: " + kind);
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

TradeoffReport tradeoff_experiment(const AdversaryInstance& instance,
                                   const TradeoffAlgoFactory& factory, long horizon,
                                   const std::vector<uint64_t>& seeds, double noise_sigma,
                                   int workers) {
  if (!instance.certified) {
    throw UncertifiedInstance("trade-off experiment needs a certified instance");
  }
  if (seeds.empty()) throw InvalidArgs("need at least one seed");
  const int bins = instance.num_bins();
  const int n_seeds = static_cast<int>(seeds.size());
  const double delta = instance.params.delta;

  TradeoffReport rep;
  rep.delta = delta;
  rep.bins = bins;
  rep.mean_regret_s.assign(bins, 0.0);
  rep.mean_bin_count_on_phi0.assign(bins, 0.0);
  rep.worst_accounting_slack = 1e300;

  const int cells = (bins + 1) * n_seeds;
  std::vector<double> final_regret(cells, 0.0);
  std::vector<std::vector<long>> counts(cells);
  std::vector<char> acct_ok(cells, 1);
  std::vector<double> acct_slack(cells, 1e300);

  parallel_for(cells, workers, [&](int cell) {
    const int s = cell / n_seeds;
    const uint64_t seed = seeds[cell % n_seeds];
    const Environment env = make_adversary_env(instance, s, noise_sigma);
    auto algo = factory(horizon);
    const RegretTrace trace = run_episode(*algo, env, horizon, seed);
    final_regret[cell] = trace.final_regret();
    counts[cell].assign(bins + 1, 0);
    for (int b = 0; b <= bins; ++b) counts[cell][b] = trace.bin_count(b);
    if (s >= 1) {
      // accounting identity on the realized trace: R_{T,s} >= (Delta/2)(T - N_{H_s})
      const double lhs = trace.final_regret();
      const double rhs = 0.5 * delta * (horizon - trace.bin_count(s));
      acct_slack[cell] = lhs - rhs;
      acct_ok[cell] = lhs >= rhs - 1e-9 * std::max(1.0, std::abs(rhs));
    }
  });

  for (int cell = 0; cell < cells; ++cell) {
    const int s = cell / n_seeds;
    if (s == 0) {
      rep.r_tilde_measured += final_regret[cell] / n_seeds;
      for (int b = 1; b <= bins; ++b) {
        rep.mean_bin_count_on_phi0[b - 1] += static_cast<double>(counts[cell][b]) / n_seeds;
      }
    } else {
      rep.mean_regret_s[s - 1] += final_regret[cell] / n_seeds;
      rep.accounting_ok = rep.accounting_ok && acct_ok[cell];
      rep.worst_accounting_slack = std::min(rep.worst_accounting_slack, acct_slack[cell]);
    }
  }
  rep.mean_over_s_regret =
      std::accumulate(rep.mean_regret_s.begin(), rep.mean_regret_s.end(), 0.0) / bins;
  rep.bound_rhs =
      0.5 * delta * horizon * (0.5 - std::sqrt(delta * rep.r_tilde_measured / bins));
  return rep;
}

}  // namespace kbandit
