#pragma once

#include <memory>
#include <vector>

#include "kbandit/bandit.hpp"
#include "kbandit/metrics.hpp"
#include "kbandit/regression.hpp"

namespace kbandit {

// Argmax of mu(x) + w_t sigma(x) over the uniform grid, with
// w_t = B + ucb_scale * sqrt(2 (info_gain + 1 + ln(1/delta))).
// Ties break to the smallest grid index. Contract-level path through
// PosteriorState; the GpUcb class below is the equivalent fast path.
double gpucb_select(const PosteriorState& state, const AlgoConfig& cfg, long t);

class GpUcb : public BanditAlgorithm {
 public:
  explicit GpUcb(const AlgoConfig& cfg);

  double select_action(long t) override;
  void observe(double x, double y) override;
  void reset() override;

  double confidence_width() const;
  const std::vector<double>& grid() const { return grid_; }

 private:
  AlgoConfig cfg_;
  KernelSpec kernel_;
  std::vector<double> grid_;
  std::shared_ptr<const Eigen::MatrixXd> prior_;
  std::unique_ptr<GridPosterior> post_;
  int grid_index_of(double x) const;
};

// Sup-style elimination algorithm over the uniform grid. Per step the stage
// chain is rebuilt from stage 1: play any surviving arm whose stage-local
// width exceeds 2^{-s}; otherwise eliminate arms whose UCB trails the best
// LCB by more than 2*2^{-s} and descend. Stage-local posteriors see only
// observations made at their own stage; exploitation plays at the deepest
// stage are not recorded.
class SupKernelUcb : public BanditAlgorithm {
 public:
  SupKernelUcb(const AlgoConfig& cfg, long horizon);

  double select_action(long t) override;
  void observe(double x, double y) override;
  void reset() override;

  int stages() const { return num_stages_; }
  // surviving arm indices after filtering down to stage s with current data
  std::vector<int> active_arms(int stage);

 private:
  AlgoConfig cfg_;
  long horizon_;
  int num_stages_;
  double conf_;
  KernelSpec kernel_;
  std::vector<double> grid_;
  std::shared_ptr<const Eigen::MatrixXd> prior_;
  std::vector<std::unique_ptr<GridPosterior>> stage_post_;
  int pending_stage_ = -1;
  int pending_arm_ = -1;

  GridPosterior& stage(int s);
  double width(int s, int arm);
};

// Doubling wrapper: fresh instances on epochs of length 1, 2, 4, ... until
// the budget runs out (final epoch truncated), making the wrapped algorithm
// anytime up to a constant factor.
class DoublingWrapper : public BanditAlgorithm {
 public:
  using Factory = std::function<std::unique_ptr<BanditAlgorithm>(long epoch_len)>;
  DoublingWrapper(Factory factory, long total_budget);

  double select_action(long t) override;
  void observe(double x, double y) override;
  void reset() override;

  // epoch lengths that partition [1, T]
  static std::vector<long> epoch_lengths(long total_budget);

 private:
  Factory factory_;
  long budget_;
  std::unique_ptr<BanditAlgorithm> current_;
  long epoch_len_ = 1;
  long used_in_epoch_ = 0;
  long local_t_ = 0;
};

// Candidate pseudo-regret bound of base algorithm i:
//   C sqrt(B_i) t^{beta_i} ln(e t) sqrt(ln(M ln(e t) / delta)),
// beta_i = (nu_i + 1)/(2 nu_i + 1). Monotone non-decreasing in t.
double candidate_bound(double nu_i, double b_i, double t, double delta, int num_bases,
                       double scale = 1.0);
double candidate_exponent(double nu_i);  // beta_i

// Convenience: run SupKernelUCB against an environment for a fixed horizon.
RegretTrace supkernelucb_run(const Environment& env, const AlgoConfig& cfg, long horizon,
                             uint64_t seed);

}  // namespace kbandit
