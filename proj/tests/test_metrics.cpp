#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kbandit/metrics.hpp"
#include "kbandit/rng.hpp"

using namespace kbandit;

namespace {

class FixedAction : public BanditAlgorithm {
 public:
  explicit FixedAction(double x) : x_(x) {}
  double select_action(long) override { return x_; }
  void observe(double, double) override {}
  void reset() override {}

 private:
  double x_;
};

class UniformRandomPlay : public BanditAlgorithm {
 public:
  explicit UniformRandomPlay(uint64_t seed) : rng_(mix_key(hash_id("urand"), seed)) {}
  double select_action(long) override { return rng_.uniform01(); }
  void observe(double, double) override {}
  void reset() override {}

 private:
  CounterRng rng_;
};

AdversaryInstance small_instance(int target_bins = 4) {
  const double l1 = pick_l1_for_bins(1, 2, 20.0, 25.0, target_bins);
  auto inst = construct_instance(1, 2, l1, 20.0, 25.0);
  verify_conditions(inst, 1 << 14);
  REQUIRE(inst.certified);
  return inst;
}

}  // namespace

TEST_CASE("environment validates the declared maximum") {
  CHECK_THROWS_AS(
      make_environment("bad", [](double x) { return x; }, 0.5, 1.0, 0.0),
      InvalidArgs);
  const auto env = make_environment("ok", [](double x) { return -(x - 0.6) * (x - 0.6); }, 0.0,
                                    0.6, 0.0);
  CHECK(env.f_star == 0.0);
}

TEST_CASE("kernel expansion test functions have exact norm") {
  const auto spec = KernelSpec::matern(1.5);
  const auto fn = make_kernel_expansion(spec, 2.0, 12, 99);
  const auto gram = gram_matrix(spec, fn.centers);
  Eigen::Map<const Eigen::VectorXd> alpha(fn.coefs.data(), fn.coefs.size());
  CHECK(std::sqrt(alpha.dot(gram * alpha)) == doctest::Approx(2.0).epsilon(1e-12));

  const auto env = make_kernel_expansion_env(spec, 2.0, 12, 99, 0.5);
  CHECK(env.reward_fn(0.37) == doctest::Approx(fn.eval(0.37)).epsilon(1e-15));
  // deterministic in the seed
  const auto env2 = make_kernel_expansion_env(spec, 2.0, 12, 99, 0.5);
  CHECK(env.f_star == env2.f_star);
  CHECK(env.x_star == env2.x_star);
}

TEST_CASE("episodes: zero regret on constant rewards, bit-exact replay") {
  const auto env = make_environment("const", [](double) { return 1.0; }, 1.0, 0.5, 0.0);
  FixedAction algo(0.25);
  const auto trace = run_episode(algo, env, 50, 7);
  for (double r : trace.cum_regret) CHECK(r == 0.0);

  const auto noisy = make_environment("noisy", [](double) { return 1.0; }, 1.0, 0.5, 0.5);
  UniformRandomPlay a1(3), a2(3);
  const auto t1 = run_episode(a1, noisy, 200, 11);
  const auto t2 = run_episode(a2, noisy, 200, 11);
  REQUIRE(t1.actions == t2.actions);
  REQUIRE(t1.rewards == t2.rewards);
  REQUIRE(t1.cum_regret == t2.cum_regret);
  // regret is non-decreasing
  for (size_t i = 1; i < t1.cum_regret.size(); ++i) {
    REQUIRE(t1.cum_regret[i] >= t1.cum_regret[i - 1]);
  }
}

TEST_CASE("noise stream is centred") {
  const uint64_t key = mix_key(hash_id("noise-check"), 1);
  double sum = 0.0;
  const int n = 10000;
  for (int t = 1; t <= n; ++t) sum += gaussian_at(key, t);
  CHECK(std::abs(sum / n) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("exponent estimation on synthetic power laws") {
  std::vector<double> horizons{256, 512, 1024, 2048, 4096, 8192};
  std::vector<double> regrets;
  for (double t : horizons) regrets.push_back(3.0 * std::pow(t, 0.7));
  const auto [slope, se] = estimate_exponent(horizons, regrets);
  CHECK(slope == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(se <= 1e-9);

  std::vector<double> flat(horizons.size(), 5.0);
  CHECK(estimate_exponent(horizons, flat).first == doctest::Approx(0.0));

  std::vector<double> with_zero{1.0, 2.0, 0.0, 3.0};
  CHECK_THROWS_AS(estimate_exponent({256, 512, 1024, 2048}, with_zero), DegenerateFit);
  CHECK_THROWS_AS(estimate_exponent({256, 512}, {1.0, 2.0}), InvalidArgs);
}

TEST_CASE("theory exponents: exact rational identities") {
  CHECK(minimax_exponent(1) == Rational(3, 4));
  CHECK(minimax_exponent(3) == Rational(5, 8));
  CHECK(lower_exponent(1, 3) == Rational(19, 24));
  CHECK(corral_exponent(3, 1) == Rational(19, 24));
  CHECK(rbbe_exponent(1) == Rational(7, 8));
  CHECK(lower_exponent(1, 3) < rbbe_exponent(1));

  for (int k : {1, 3, 5, 7}) {
    CHECK(lower_exponent(k, k) == minimax_exponent(k));
    CHECK(corral_exponent(k, k) == minimax_exponent(k));
    // all exponents lie in (1/2, 1)
    for (const Rational r : {minimax_exponent(k), rbbe_exponent(k), lower_exponent(1, k),
                             corral_exponent(k, 1), corral_exponent(1, k)}) {
      CHECK(Rational(1, 2) < r);
      CHECK(r < Rational(1, 1));
    }
  }

  CHECK(theory_exponents("minimax", {0.5}) == doctest::Approx(0.75));
  CHECK(theory_exponents("lower", {0.5, 1.5}) == doctest::Approx(19.0 / 24.0));
  CHECK(theory_exponents("corral", {1.5, 0.5}) == doctest::Approx(19.0 / 24.0));
  CHECK(theory_exponents("rbbe", {0.5}) == doctest::Approx(0.875));
  CHECK_THROWS_AS(theory_exponents("lower", {1.5, 0.5}), InvalidArgs);
  CHECK_THROWS_AS(theory_exponents("minimax", {0.7}), InvalidArgs);
  CHECK_THROWS_AS(theory_exponents("qqq", {0.5}), InvalidArgs);
}

TEST_CASE("bin accounting on adversary environments") {
  const auto inst = small_instance();
  const auto env = make_adversary_env(inst, 1, 0.0);
  UniformRandomPlay algo(5);
  const long horizon = 512;
  const auto trace = run_episode(algo, env, horizon, 5);
  long total = 0;
  for (const auto& [bin, count] : trace.bin_counts) total += count;
  CHECK(total == horizon);
}

TEST_CASE("trade-off report: pinned player and uniform player") {
  const auto inst = small_instance();
  const double delta = inst.params.delta;
  const long horizon = 256;
  const std::vector<uint64_t> seeds{1, 2, 3, 4};

  // player pinned inside H_1: accounting for s=1 is vacuous, s=2 forces
  // regret Delta * T (it never touches H_2 and earns phi_2 = 0)
  const double pinned_x = inst.bin_mid(1);
  auto pinned = tradeoff_experiment(
      inst, [&](long) { return std::make_unique<FixedAction>(pinned_x); }, horizon, seeds, 0.5);
  CHECK(pinned.accounting_ok);
  CHECK(pinned.mean_regret_s[1] >= 0.5 * delta * horizon - 1e-9);
  CHECK(pinned.mean_regret_s[0] == doctest::Approx(0.0));

  // uniform-random play hits H_s about T/(2M) times
  int counter = 0;
  auto uniform = tradeoff_experiment(
      inst,
      [&](long) { return std::make_unique<UniformRandomPlay>(1000 + counter++); }, horizon,
      seeds, 0.5);
  CHECK(uniform.accounting_ok);
  const double expect = static_cast<double>(horizon) / (2.0 * inst.num_bins());
  const double sd = std::sqrt(expect);
  for (double c : uniform.mean_bin_count_on_phi0) {
    CHECK(std::abs(c - expect) <= 5.0 * sd / std::sqrt(static_cast<double>(seeds.size())) + 1.0);
  }
}

TEST_CASE("uncertified instances are rejected") {
  const double l1 = pick_l1_for_bins(1, 2, 20.0, 25.0, 4);
  auto inst = construct_instance(1, 2, l1, 20.0, 25.0);  // not certified
  CHECK_THROWS_AS(make_adversary_env(inst, 0, 0.5), UncertifiedInstance);
  CHECK_THROWS_AS(tradeoff_experiment(
                      inst, [](long) { return std::make_unique<FixedAction>(0.1); }, 16, {1}, 0.5),
                  UncertifiedInstance);
}

TEST_CASE("parallel_for covers every index") {
  std::vector<int> hits(257, 0);
  parallel_for(257, 3, [&](int i) { hits[i]++; });
  for (int h : hits) CHECK(h == 1);
}
