#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "kbandit/kernels.hpp"

namespace kbandit {

// Kernel-ridge / GP posterior over observations in [0,1]. Immutable after
// construction; update() returns a new state sharing no mutable storage.
struct PosteriorState {
  KernelSpec kernel;
  std::vector<double> points;
  std::vector<double> targets;
  double lambda = 0.25;           // declared regularizer (may be 0)
  double lambda_eff = 0.25;       // max(lambda, jitter), used in solves
  Eigen::MatrixXd chol;           // lower factor of K + lambda_eff I
  Eigen::VectorXd alpha;          // (K + lambda_eff I)^{-1} y
  double info_gain_value = 0.0;   // 1/2 log det(I + K / lambda_eff)

  int size() const { return static_cast<int>(points.size()); }
};

inline constexpr double kDefaultLambda = 0.25;  // noise-variance proxy of the 1/4-subgaussian model

// Batch fit. Throws FactorizationFailure if K + lambda I + jitter is not
// numerically positive definite.
PosteriorState fit(const KernelSpec& kernel, std::span<const double> points,
                   std::span<const double> targets, double lambda = kDefaultLambda);

// Posterior (mean, variance) at x.
std::pair<double, double> predict(const PosteriorState& state, double x);

// Rank-1 factor extension; falls back to a refit from scratch when the
// incremental step loses positive definiteness.
PosteriorState update(const PosteriorState& state, double x, double y);

double info_gain(const PosteriorState& state);

// Posterior restricted to a fixed uniform grid; every observation is a grid
// index. Maintains mean, covariance and running information gain with an
// O(N^2) sequential-Bayes update, which matches the batch fit exactly.
// This is the workhorse behind the UCB algorithms; its equivalence to
// PosteriorState is covered by tests.
class GridPosterior {
 public:
  GridPosterior(std::shared_ptr<const Eigen::MatrixXd> prior_gram, double lambda);

  void observe(int grid_index, double y);

  double mean(int i) const { return mean_(i); }
  double variance(int i) const { return std::max(0.0, cov_(i, i)); }
  double info_gain() const { return info_gain_; }
  int count() const { return n_obs_; }
  int grid_size() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& means() const { return mean_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  double lambda_;
  double info_gain_ = 0.0;
  int n_obs_ = 0;
};

// Shared prior Gram over a uniform grid of n points on [0,1] (endpoints
// included for n >= 2).
std::shared_ptr<const Eigen::MatrixXd> make_grid_gram(const KernelSpec& kernel, int n);
std::vector<double> uniform_grid(int n);

}  // namespace kbandit
