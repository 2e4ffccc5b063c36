#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

#include "kbandit/errors.hpp"

namespace kbandit {

// Translation-invariant kernel on [0,1], d = 1. Restricted to half-integer
// Matern regularity: those orders admit exact closed forms
//   k(r) = exp(-z) * p!/(2p)! * sum_{i=0..p} (p+i)!/(i!(p-i)!) (2z)^{p-i},
// with z = sqrt(2 nu) r / l and p = nu - 1/2.
struct KernelSpec {
  int twice_nu = 3;         // 2*nu, odd positive, <= 7
  double lengthscale = 0.0; // if constructed via matern(), 0 means sqrt(2 nu)

  double nu() const { return 0.5 * twice_nu; }

  // Validates nu in {1/2, 3/2, 5/2, 7/2} and lengthscale > 0.
  // lengthscale <= 0 selects the default l = sqrt(2 nu), which makes z = r.
  static KernelSpec matern(double nu, double lengthscale = 0.0);

  std::string serialize() const;
  static KernelSpec parse(const std::string& text);

  bool operator==(const KernelSpec&) const = default;
};

// k(x,x') as a function of r = |x - x'|; k(0) = 1, strictly decreasing.
double matern_eval(const KernelSpec& spec, double r);

// Spectral density c1 * (2 nu / l^2 + w^2)^{-(nu + 1/2)} with
// c1 = 2 sqrt(pi) Gamma(nu + 1/2) (2 nu)^nu / (Gamma(nu) l^{2 nu}).
double matern_fourier(const KernelSpec& spec, double omega);

// nu + d/2 with d = 1.
double fourier_decay_rate(const KernelSpec& spec);

// Gram matrix over points in [0,1]; symmetric, PSD up to round-off.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const double> points);

// Samples k on a symmetric grid, takes a DFT, and fits the tail log-log
// slope of the spectrum; returns the estimated decay exponent m_hat
// (= -slope/2). Throws GridTooCoarse when the power-law fit is poor.
// grid_size must be a power of two >= 2^12.
double empirical_fourier_decay(const KernelSpec& spec, int grid_size);

// Diagonal jitter applied before factorizations (numerical PSD at
// coincident points).
inline constexpr double kGramJitter = 1e-10;

}  // namespace kbandit
