#pragma once

namespace kbandit {

// Behavioral contract shared by base algorithms and masters. Deterministic
// given the seed and observation history; one instance is a single unit of
// execution and owns all of its state.
class BanditAlgorithm {
 public:
  virtual ~BanditAlgorithm() = default;
  // t is 1-based within the algorithm's own clock.
  virtual double select_action(long t) = 0;
  virtual void observe(double x, double y) = 0;
  virtual void reset() = 0;
};

struct AlgoConfig {
  double nu_input = 1.5;     // assumed regularity (half-integer)
  double B_input = 2.0;      // assumed RKHS-ball radius
  int grid_size = 512;       // uniform action grid
  double delta = 0.05;       // confidence level
  double ucb_scale = 0.5;    // matches the 1/4-subgaussian noise scale
  double lambda = 0.25;      // posterior regularizer
  double lengthscale = 0.0;  // 0 selects sqrt(2 nu)
};

}  // namespace kbandit
