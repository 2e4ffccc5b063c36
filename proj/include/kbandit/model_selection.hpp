#pragma once

#include <memory>
#include <vector>

#include "kbandit/bandit.hpp"
#include "kbandit/errors.hpp"
#include "kbandit/rng.hpp"

namespace kbandit {

// Smoothed-CORRAL master state: log-barrier mirror descent over base
// algorithms with a uniform-mixing floor, per-base probability thresholds,
// and learning-rate inflation on threshold events.
struct CorralState {
  int num_bases = 0;
  std::vector<double> p;      // simplex weights
  std::vector<double> eta;    // per-base learning rates
  std::vector<double> rho;    // per-base thresholds (1 / min allowed probability)
  double gamma = 0.0;         // uniform-mixing coefficient, 1/T
  long horizon = 0;
  double reward_min = -1.0;   // affine reward-to-loss map range
  double reward_max = 1.0;
  long restarts_total = 0;
};

// p uniform; eta_i = T^{-(1+nu~)/(1+2nu~)}; rho_i = 2M; gamma = 1/T.
CorralState corral_init(double nu_tilde, long horizon, int num_bases,
                        double reward_min = -1.0, double reward_max = 1.0,
                        double eta_override = 0.0);

// One master update given the sampled base and its observed raw reward:
// importance-weighted loss for the chosen base, log-barrier step (bisection
// for the normalizer to 1e-10, 200 iterations, else NormalizerNotFound),
// gamma-mixing, then threshold maintenance. Returns the bases whose
// probability crossed 1/rho_i this step: their rho doubled-or-more, their
// learning rate inflated by e^{1/ln T}, and the caller must restart them.
// Throws RewardOutOfRange when the affine map lands outside [-0.5, 1.5].
std::vector<int> corral_update(CorralState& state, int chosen, double raw_reward);

class CorralMaster : public BanditAlgorithm {
 public:
  CorralMaster(std::vector<std::unique_ptr<BanditAlgorithm>> bases, double nu_tilde,
               long horizon, uint64_t seed, double reward_min = -1.0,
               double reward_max = 1.0, double eta_override = 0.0);

  double select_action(long t) override;
  void observe(double x, double y) override;
  void reset() override;

  const CorralState& state() const { return state_; }
  int last_chosen() const { return pending_; }
  const std::vector<long>& plays() const { return plays_; }

 private:
  std::vector<std::unique_ptr<BanditAlgorithm>> bases_;
  std::vector<long> base_clock_;
  std::vector<long> plays_;
  double nu_tilde_;
  double eta_override_;
  CorralState state_;
  CounterRng rng_;
  uint64_t seed_;
  int pending_ = -1;
};

// Regret bound balancing and elimination. Plays the active base with the
// smallest presumed cumulative pseudo-regret and eliminates bases whose
// observed mean reward is inconsistent with their candidate bound.
struct RbbeState {
  std::vector<int> active;        // still-active base indices (sorted)
  std::vector<long> plays;        // n_i(t)
  std::vector<double> cum_reward;
  std::vector<double> nu;         // per-base candidate regularity
  std::vector<double> radius;     // per-base candidate RKHS radius B_i
  double delta = 0.05;
  double bound_scale = 1.0;
  long t = 0;

  int num_bases() const { return static_cast<int>(plays.size()); }
  bool is_active(int i) const;
};

RbbeState rbbe_init(const std::vector<std::pair<double, double>>& candidates, double delta,
                    double bound_scale = 1.0);

// Presumed cumulative regret of base i at its own play count (>= 1).
double rbbe_bound(const RbbeState& state, int i, long n);

// argmin over active bases of bound_i(max(n_i, 1)); ties to smallest index.
int rbbe_select(const RbbeState& state, long t);

// Confidence radius c(n) = sqrt(ln(M ln(e t)/delta) / (2 n)) for the
// 1/4-subgaussian noise scale.
double rbbe_confidence(long n, long t, int num_bases, double delta);

// Removes active bases i (with n_i >= 1) failing
//   mean_i + bound_i(n_i)/n_i + c(n_i) >= max_j (mean_j - c(n_j));
// idempotent. Returns the eliminated indices.
std::vector<int> rbbe_eliminate(RbbeState& state, long t);

// Play-ratio bound between two base learners:
//   max{ (2 theta_j / theta_i)^{1/beta_i} n_j^{beta_j/beta_i - 1}, 2 }.
double play_ratio_bound(double theta_i, double theta_j, double beta_i, double beta_j,
                        double n_j);

class RbbeMaster : public BanditAlgorithm {
 public:
  RbbeMaster(std::vector<std::unique_ptr<BanditAlgorithm>> bases,
             const std::vector<std::pair<double, double>>& candidates, double delta,
             double bound_scale = 1.0);

  double select_action(long t) override;
  void observe(double x, double y) override;
  void reset() override;

  const RbbeState& state() const { return state_; }

 private:
  std::vector<std::unique_ptr<BanditAlgorithm>> bases_;
  std::vector<long> base_clock_;
  std::vector<std::pair<double, double>> candidates_;
  double delta_;
  double bound_scale_;
  RbbeState state_;
  int pending_ = -1;
};

}  // namespace kbandit
