#include "kbandit/kernels.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>
#include <vector>

namespace kbandit {

KernelSpec KernelSpec::matern(double nu, double lengthscale) {
  const double tn = 2.0 * nu;
  const int twice_nu = static_cast<int>(std::lround(tn));
  if (std::abs(tn - twice_nu) > 1e-12 || twice_nu % 2 == 0 || twice_nu < 1 || twice_nu > 7) {
    throw InvalidArgs("matern regularity must be in {1/2, 3/2, 5/2, 7/2}, got nu=" + std::to_string(nu));
  }
  if (lengthscale < 0.0) throw InvalidArgs("lengthscale must be positive");
  KernelSpec spec;
  spec.twice_nu = twice_nu;
  spec.lengthscale = lengthscale > 0.0 ? lengthscale : std::sqrt(2.0 * nu);
  return spec;
}

std::string KernelSpec::serialize() const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "family=matern\nnu=%d/2\nlengthscale=%.17g\n", twice_nu, lengthscale);
  return buf;
}

KernelSpec KernelSpec::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line, family;
  double nu = -1.0, l = -1.0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("kernel spec line missing '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "family") {
      family = val;
    } else if (key == "nu") {
      const auto slash = val.find('/');
      if (slash != std::string::npos) {
        nu = std::stod(val.substr(0, slash)) / std::stod(val.substr(slash + 1));
      } else {
        nu = std::stod(val);
      }
    } else if (key == "lengthscale") {
      l = std::stod(val);
    } else {
      throw ConfigError("unknown kernel spec key: " + key);
    }
  }
  if (family != "matern") throw ConfigError("unsupported kernel family: " + family);
  return matern(nu, l);
}

double matern_eval(const KernelSpec& spec, double r) {
  if (r < 0.0) throw InvalidArgs("matern_eval requires r >= 0");
  const double z = std::sqrt(static_cast<double>(spec.twice_nu)) * r / spec.lengthscale;
  switch (spec.twice_nu) {
    case 1:
      return std::exp(-z);
    case 3:
      return (1.0 + z) * std::exp(-z);
    case 5:
      return (1.0 + z + z * z / 3.0) * std::exp(-z);
    case 7:
      return (1.0 + z + 0.4 * z * z + z * z * z / 15.0) * std::exp(-z);
    default:
      throw InvalidArgs("unsupported twice_nu");
  }
}

double fourier_decay_rate(const KernelSpec& spec) { return spec.nu() + 0.5; }

double matern_fourier(const KernelSpec& spec, double omega) {
  const double nu = spec.nu();
  const double l = spec.lengthscale;
  const double c1 = 2.0 * std::sqrt(M_PI) * std::tgamma(nu + 0.5) * std::pow(2.0 * nu, nu) /
                    (std::tgamma(nu) * std::pow(l, 2.0 * nu));
  return c1 * std::pow(2.0 * nu / (l * l) + omega * omega, -(nu + 0.5));
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, std::span<const double> points) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = matern_eval(spec, std::abs(points[i] - points[j]));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double empirical_fourier_decay(const KernelSpec& spec, int grid_size) {
  if (grid_size < (1 << 12) || (grid_size & (grid_size - 1)) != 0) {
    throw InvalidArgs("grid_size must be a power of two >= 2^12");
  }
  // Sample on [-W, W); W large enough that the truncated tail sits far below
  // the spectral values in the fitted band.
  const double knee = std::sqrt(2.0 * spec.nu()) / spec.lengthscale;
  const double width = 64.0 / knee;
  const int n = grid_size;
  const double dr = 2.0 * width / n;

  std::vector<double> samples(n);
  for (int j = 0; j < n; ++j) {
    const double r = -width + dr * j;
    samples[j] = matern_eval(spec, std::abs(r));
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, samples);

  // |F_k| * dr approximates the spectral density at omega_k = pi k / W.
  // Fit log-magnitude against log-omega on a fixed band past the knee.
  const double omega_lo = 8.0 * knee;
  const double omega_hi = 48.0 * knee;
  std::vector<double> lx, ly;
  for (int k = 1; k <= n / 2; ++k) {
    const double omega = M_PI * k / width;
    if (omega < omega_lo || omega > omega_hi) continue;
    const double mag = std::abs(freq[k]) * dr;
    if (mag <= 0.0) continue;
    lx.push_back(std::log(omega));
    ly.push_back(std::log(mag));
  }
  if (lx.size() < 8) throw GridTooCoarse("too few spectral samples in the fit band");

  const auto m = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / m;
  double rss = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    const double resid = ly[i] - (intercept + slope * lx[i]);
    rss += resid * resid;
  }
  const double rms = std::sqrt(rss / m);
  if (rms > 0.05) {
    throw GridTooCoarse("power-law fit residual " + std::to_string(rms) + " exceeds 0.05");
  }
  return -slope / 2.0;
}

}  // namespace kbandit
