#include "kbandit/adversary.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kbandit {

double bump(double x) {
  if (std::abs(x) >= 1.0 - 1e-12) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}

double bump_derivative(int m, double x) {
  if (m == 0) return bump(x);
  if (std::abs(x) >= 1.0 - 1e-12) return 0.0;
  // numerator polynomials of K0^(m) over (1-x^2)^{2m}
  static const std::vector<std::vector<double>> kNum = {
      {-2, 0},
      {6, 0, 0, 0, -2},
      {-24, 0, -12, 0, 40, 0, -12, 0},
      {120, 0, 180, 0, -528, 0, 232, 0, 24, 0, -12},
  };
  if (m < 1 || m > 4) throw InvalidArgs("bump_derivative supports m in {0,...,4}");
  double num = 0.0;
  for (double c : kNum[m - 1]) num = num * x + c;
  const double one_minus = 1.0 - x * x;
  return num / std::pow(one_minus, 2 * m) * std::exp(-1.0 / one_minus);
}

namespace {

double derivative_energy(int m, int grid) {
  // trapezoid of [K0^(m)]^2 over [-1,1]; the integrand vanishes to all orders
  // at the endpoints
  const double dx = 2.0 / grid;
  double sum = 0.0;
  for (int i = 1; i < grid; ++i) {
    const double u = -1.0 + dx * i;
    const double v = bump_derivative(m, u);
    sum += v * v;
  }
  return sum * dx;
}

double derivative_energy_checked(int m) {
  const double coarse = derivative_energy(m, 1 << 15);
  const double fine = derivative_energy(m, 1 << 16);
  if (std::abs(fine - coarse) > 0.005 * std::abs(fine)) {
    throw QuadratureNotConverged("derivative energy I_" + std::to_string(m) +
                                 " unstable under grid refinement");
  }
  return fine;
}

constexpr double kPeakTol = 1e-6;
constexpr double kOffBinEqTol = 1e-12;
constexpr double kOffBinGapSlack = 1e-9;

}  // namespace

BumpConstants compute_constants(int m1, int m2) {
  if (m1 < 1 || m2 <= m1 || m2 > 4) throw InvalidArgs("need 1 <= m1 < m2 <= 4");
  BumpConstants c;
  c.k0_star = std::exp(-1.0);
  c.i_m1 = derivative_energy_checked(m1);
  c.i_m2 = derivative_energy_checked(m2);
  c.c_m1 = c.k0_star / (std::pow(2.0, 2 * m1 - 1) * std::sqrt(c.i_m1));
  c.c_prime = std::pow(2.0, 2 * m2 - 2) *
              std::pow(c.c_m1 / 32.0, (m1 - 0.5) / (m1 + 0.5)) * std::sqrt(c.i_m2) / c.k0_star;
  return c;
}

double AdversaryInstance::bin_lo(int s) const {
  return s == 0 ? 0.5 : (s - 1) * params.h;
}

double AdversaryInstance::bin_hi(int s) const { return s == 0 ? 1.0 : s * params.h; }

double AdversaryInstance::bin_mid(int s) const {
  return s == 0 ? 0.75 : (s - 0.5) * params.h;
}

int AdversaryInstance::bin_of(double x) const {
  if (x >= 0.5) return 0;
  const int s = 1 + static_cast<int>(std::floor(x / params.h));
  return std::min(std::max(s, 1), params.num_bins);
}

double AdversaryInstance::f_rough(int s, double x) const {
  return params.a * std::pow(params.h, params.m1 - 0.5) *
         bump(params.b * (x - bin_mid(s)) / params.h);
}

double AdversaryInstance::f_smooth(double x) const {
  return params.a_tilde * std::pow(params.h, params.m2 - 0.5) *
         bump(params.b_tilde * (x - 0.75) / params.h);
}

double AdversaryInstance::phi(int s, double x) const {
  return s == 0 ? f_smooth(x) : f_rough(s, x) + f_smooth(x);
}

std::pair<double, double> l1_admissible_range(int m1, int m2, double l2, double r_tilde) {
  const auto c = compute_constants(m1, m2);
  const double lo =
      std::pow(3.0, m1 + 0.5) / 32.0 * std::pow(c.c_m1, -(m1 - 0.5)) / r_tilde;
  const double hi = std::pow(c.c_prime, -(m1 + 0.5)) * std::pow(l2, m1 + 0.5) *
                    std::pow(r_tilde, m1 - 0.5);
  return {lo, hi};
}

AdversaryInstance construct_instance(int m1, int m2, double l1, double l2, double r_tilde) {
  if (l1 <= 0 || l2 <= 0 || r_tilde <= 0) throw InvalidArgs("radii and R~ must be positive");
  const auto c = compute_constants(m1, m2);
  const auto [lo, hi] = l1_admissible_range(m1, m2, l2, r_tilde);
  if (l1 < lo) {
    throw ConstraintViolation("L1 lower bound",
                              "L1 >= 3^{m1+1/2}/32 * C(m1)^{-(m1-1/2)} / R~ requires L1 >= " +
                                  std::to_string(lo) + ", got " + std::to_string(l1));
  }
  if (l1 > hi) {
    throw ConstraintViolation("L1 upper bound",
                              "L1 <= C'(m1,m2)^{-(m1+1/2)} L2^{m1+1/2} R~^{m1-1/2} requires L1 <= " +
                                  std::to_string(hi) + ", got " + std::to_string(l1));
  }

  AdversaryInstance inst;
  auto& p = inst.params;
  p.m1 = m1;
  p.m2 = m2;
  p.l1 = l1;
  p.l2 = l2;
  p.r_tilde = r_tilde;

  p.delta = std::pow(c.c_m1 * l1, 1.0 / (m1 + 0.5)) *
            std::pow(32.0 * r_tilde, -(m1 - 0.5) / (m1 + 0.5));
  // pre-floor bin count equals 32 Delta R~ at the maximizing Delta
  const double pre_floor = std::pow(c.c_m1 * l1 / p.delta, 2.0 / (2 * m1 - 1));
  p.num_bins = static_cast<int>(std::floor(pre_floor + 1e-9));
  if (p.num_bins < 2) {
    throw ConstraintViolation("M >= 2", "bin count " + std::to_string(p.num_bins) +
                                            " (pre-floor " + std::to_string(pre_floor) + ")");
  }
  p.h = 1.0 / (2.0 * p.num_bins);

  p.a = p.delta * std::pow(2.0 * p.num_bins, m1 - 0.5) / c.k0_star;
  p.a_tilde = p.delta * std::pow(2.0 * p.num_bins, m2 - 0.5) / (2.0 * c.k0_star);
  p.b = std::pow(l1 * l1 * c.k0_star * c.k0_star /
                     (p.delta * p.delta * std::pow(2.0 * p.num_bins, 2 * m1 - 1) * c.i_m1),
                 1.0 / (2 * m1 - 1));
  p.b_tilde = std::pow(4.0 * l2 * l2 * c.k0_star * c.k0_star /
                           (p.delta * p.delta * std::pow(2.0 * p.num_bins, 2 * m2 - 1) * c.i_m2),
                       1.0 / (2 * m2 - 1));

  if (p.b < 2.0 - 1e-9) {
    throw ConstraintViolation("b >= 2", "squeeze " + std::to_string(p.b));
  }
  if (p.b_tilde < 4.0 * p.h - 1e-12) {
    throw ConstraintViolation("b~ >= 4h", "squeeze " + std::to_string(p.b_tilde) +
                                              " < " + std::to_string(4.0 * p.h));
  }
  const double cond = std::sqrt(p.delta * r_tilde / p.num_bins);
  if (cond > 0.25 + 1e-12) {
    throw ConstraintViolation("sqrt(Delta R~ / M) <= 1/4", "value " + std::to_string(cond));
  }
  return inst;
}

double pick_l1_for_bins(int m1, int m2, double l2, double r_tilde, int target_bins) {
  if (target_bins < 2) throw InvalidArgs("target_bins must be >= 2");
  const auto [lo, hi] = l1_admissible_range(m1, m2, l2, r_tilde);
  if (!(lo < hi)) throw ConstraintViolation("L1 window", "empty admissible interval");
  auto bins_at = [&](double l1) {
    const auto c = compute_constants(m1, m2);
    const double d = std::pow(c.c_m1 * l1, 1.0 / (m1 + 0.5)) *
                     std::pow(32.0 * r_tilde, -(m1 - 0.5) / (m1 + 0.5));
    return std::pow(c.c_m1 * l1 / d, 2.0 / (2 * m1 - 1));
  };
  // bin count increases with l1; bisect in log space
  double a = lo, b = hi;
  if (bins_at(hi) < target_bins) return hi;
  if (bins_at(lo) > target_bins) return lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(a * b);
    if (bins_at(mid) < target_bins + 0.5) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return b;
}

CertificationReport verify_conditions(AdversaryInstance& instance, int grid_size) {
  if (grid_size < (1 << 14)) throw InvalidArgs("certification grid must be >= 2^14");
  CertificationReport rep;
  const auto& p = instance.params;
  const int g = grid_size;
  const double dx = 1.0 / g;
  char msg[160];

  if (p.h < 4.0 * dx) {
    std::snprintf(msg, sizeof(msg), "grid too coarse: bin width %.3g vs spacing %.3g", p.h, dx);
    rep.failures.emplace_back(msg);
    instance.certified = false;
    return rep;
  }

  // condition 1: peaks on the grid
  std::vector<double> peak(p.num_bins + 1, 0.0);
  for (int i = 0; i <= g; ++i) {
    const double x = i * dx;
    const int s = instance.bin_of(std::min(x, 1.0 - 1e-15));
    const double v = instance.phi(s, x);
    peak[s] = std::max(peak[s], v);
  }
  rep.peak0_err = std::abs(peak[0] - p.delta / 2.0);
  for (int s = 1; s <= p.num_bins; ++s) {
    rep.max_peak_err = std::max(rep.max_peak_err, std::abs(peak[s] - p.delta));
  }
  if (rep.max_peak_err > kPeakTol || rep.peak0_err > kPeakTol) {
    std::snprintf(msg, sizeof(msg), "peak condition: max|peak_s - Delta| = %.3g, |peak_0 - Delta/2| = %.3g",
                  rep.max_peak_err, rep.peak0_err);
    rep.failures.emplace_back(msg);
  }

  // condition 2: seminorm membership within 1% of the declared radii
  std::vector<int> rough_checks;
  if (p.num_bins <= 32) {
    for (int s = 1; s <= p.num_bins; ++s) rough_checks.push_back(s);
  } else {
    rough_checks = {1, p.num_bins / 2, p.num_bins};
  }
  try {
    for (int s : rough_checks) {
      const double sem =
          sobolev_seminorm([&](double x) { return instance.f_rough(s, x); }, p.m1, g);
      rep.worst_seminorm_excess = std::max(rep.worst_seminorm_excess, sem / p.l1);
      if (sem > p.l1 * 1.01) {
        std::snprintf(msg, sizeof(msg), "seminorm |f_%d|_{%d,2} = %.6g exceeds L1*1.01 = %.6g", s,
                      p.m1, sem, p.l1 * 1.01);
        rep.failures.emplace_back(msg);
        break;
      }
    }
    const double sem0 = sobolev_seminorm([&](double x) { return instance.f_smooth(x); }, p.m2, g);
    rep.worst_seminorm_excess = std::max(rep.worst_seminorm_excess, sem0 / p.l2);
    if (sem0 > p.l2 * 1.01) {
      std::snprintf(msg, sizeof(msg), "seminorm |f_0|_{%d,2} = %.6g exceeds L2*1.01 = %.6g", p.m2,
                    sem0, p.l2 * 1.01);
      rep.failures.emplace_back(msg);
    }
  } catch (const QuadratureNotConverged& e) {
    rep.failures.emplace_back(std::string("seminorm quadrature: ") + e.what());
  }

  // condition 3: phi_s == phi_0 off H_s (f_s vanishes there) and the off-bin
  // gap phi_s^* - phi_s >= Delta/2. f_s can only be nonzero on
  // (x_bar_s - h/b, x_bar_s + h/b); scan a window around each bin.
  rep.min_off_bin_gap = p.delta;
  for (int s = 1; s <= p.num_bins; ++s) {
    const int i_lo = std::max(0, static_cast<int>(std::floor((instance.bin_mid(s) - p.h) / dx)));
    const int i_hi = std::min(g, static_cast<int>(std::ceil((instance.bin_mid(s) + p.h) / dx)));
    for (int i = i_lo; i <= i_hi; ++i) {
      const double x = i * dx;
      if (x >= instance.bin_lo(s) && x < instance.bin_hi(s)) continue;
      rep.max_off_bin_eq_err = std::max(rep.max_off_bin_eq_err, std::abs(instance.f_rough(s, x)));
    }
  }
  // gap: off H_s, phi_s = phi_0 <= Delta/2; one sweep over phi_0 covers all s
  for (int i = 0; i <= g; ++i) {
    const double v = instance.f_smooth(i * dx);
    rep.min_off_bin_gap = std::min(rep.min_off_bin_gap, p.delta - v);
  }
  if (rep.max_off_bin_eq_err > kOffBinEqTol) {
    std::snprintf(msg, sizeof(msg), "off-bin equality violated: |phi_s - phi_0| up to %.3g",
                  rep.max_off_bin_eq_err);
    rep.failures.emplace_back(msg);
  }
  if (rep.min_off_bin_gap < p.delta / 2.0 - kOffBinGapSlack) {
    std::snprintf(msg, sizeof(msg), "off-bin gap %.6g below Delta/2 = %.6g", rep.min_off_bin_gap,
                  p.delta / 2.0);
    rep.failures.emplace_back(msg);
  }

  instance.certified = rep.all_ok();
  return rep;
}

double sobolev_seminorm(const std::function<double(double)>& f, int m, int grid_size) {
  if (m < 1 || m > 4) throw InvalidArgs("sobolev_seminorm supports m in {1,...,4}");
  if (grid_size < 16) throw InvalidArgs("grid too small");
  auto energy = [&](int g) {
    const double dx = 1.0 / g;
    // stencils grouped as differences so constant functions cancel exactly
    auto deriv = [&](double x) {
      const double f0 = f(x);
      switch (m) {
        case 1:
          return (f(x + dx) - f(x - dx)) / (2.0 * dx);
        case 2:
          return ((f(x + dx) - f0) + (f(x - dx) - f0)) / (dx * dx);
        case 3:
          return ((f(x + 2 * dx) - f(x - 2 * dx)) - 2.0 * (f(x + dx) - f(x - dx))) /
                 (2.0 * dx * dx * dx);
        default:
          return ((f(x + 2 * dx) - f0) + (f(x - 2 * dx) - f0) - 4.0 * (f(x + dx) - f0) -
                  4.0 * (f(x - dx) - f0)) /
                 (dx * dx * dx * dx);
      }
    };
    double sum = 0.0;
    for (int i = 0; i <= g; ++i) {
      const double d = deriv(i * dx);
      sum += (i == 0 || i == g) ? 0.5 * d * d : d * d;
    }
    return sum * dx;
  };
  const double coarse = energy(grid_size / 2);
  const double fine = energy(grid_size);
  const double value = std::sqrt(fine);
  if (value == 0.0 && coarse == 0.0) return 0.0;
  if (std::abs(std::sqrt(coarse) - value) > 0.005 * std::max(value, 1e-300)) {
    throw QuadratureNotConverged("seminorm unstable under grid refinement: " +
                                 std::to_string(std::sqrt(coarse)) + " vs " +
                                 std::to_string(value));
  }
  return value;
}

namespace {

double surrogate_once(const std::function<double(double)>& f, const KernelSpec& spec, int n) {
  // samples on [0,1], zero-padded to a period of 8
  const int total = 8 * n;
  const double dx = 1.0 / n;
  std::vector<double> samples(total, 0.0);
  for (int i = 0; i < n; ++i) samples[i] = f((i + 0.5) * dx);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, samples);
  const double period = 8.0;
  const double domega = 2.0 * M_PI / period;
  double sum = 0.0;
  for (int k = 0; k < total; ++k) {
    const int signed_k = k <= total / 2 ? k : k - total;
    const double omega = domega * signed_k;
    const double fhat = std::abs(freq[k]) * dx;
    sum += fhat * fhat / matern_fourier(spec, omega);
  }
  return std::sqrt(sum * domega / std::sqrt(2.0 * M_PI));
}

}  // namespace

std::pair<double, double> rkhs_norm_surrogate(const std::function<double(double)>& f,
                                              const KernelSpec& spec, int grid_size) {
  if (grid_size < 64) throw InvalidArgs("surrogate grid too small");
  const double coarse = surrogate_once(f, spec, grid_size / 2);
  const double fine = surrogate_once(f, spec, grid_size);
  const double delta = std::abs(fine - coarse) / std::max(std::abs(fine), 1e-300);
  if (delta > 0.05) {
    throw QuadratureNotConverged("rkhs surrogate unstable under refinement: delta = " +
                                 std::to_string(delta));
  }
  return {fine, delta};
}

double lower_bound_value(int m1, double l1, double r_tilde, double horizon) {
  const auto c = compute_constants(m1, m1 + 1);
  const double expo = (m1 - 0.5) / (m1 + 0.5);
  return 0.125 * std::pow(c.c_m1 / 32.0, expo) * std::pow(l1, 1.0 / (m1 + 0.5)) *
         std::pow(r_tilde, -expo) * horizon;
}

void export_instance(const AdversaryInstance& instance, const std::string& path, int table_grid) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  const auto& p = instance.params;
  char line[256];
  out << "# kbandit adversary instance v1\n";
  auto put = [&](const char* key, double v) {
    std::snprintf(line, sizeof(line), "%s=%.17g\n", key, v);
    out << line;
  };
  out << "m1=" << p.m1 << "\nm2=" << p.m2 << "\n";
  put("L1", p.l1);
  put("L2", p.l2);
  put("R_tilde", p.r_tilde);
  put("Delta", p.delta);
  out << "M=" << p.num_bins << "\n";
  put("h", p.h);
  put("a", p.a);
  put("b", p.b);
  put("a_tilde", p.a_tilde);
  put("b_tilde", p.b_tilde);
  out << "certified=" << (instance.certified ? 1 : 0) << "\n";
  out << "grid=" << table_grid << "\n";
  out << "x";
  for (int s = 0; s <= p.num_bins; ++s) out << ",phi_" << s;
  out << "\n";
  for (int i = 0; i <= table_grid; ++i) {
    const double x = static_cast<double>(i) / table_grid;
    std::snprintf(line, sizeof(line), "%.17g", x);
    out << line;
    for (int s = 0; s <= p.num_bins; ++s) {
      std::snprintf(line, sizeof(line), ",%.17g", instance.phi(s, x));
      out << line;
    }
    out << "\n";
  }
}

AdversaryInstance import_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  int m1 = 0, m2 = 0, bins = -1, grid = 0, certified = 0;
  double l1 = 0, l2 = 0, rt = 0, delta = 0, h = 0, a = 0, b = 0, at = 0, bt = 0;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("x,phi_0", 0) == 0) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const double val = std::stod(line.substr(eq + 1));
    if (key == "m1") m1 = static_cast<int>(val);
    else if (key == "m2") m2 = static_cast<int>(val);
    else if (key == "L1") l1 = val;
    else if (key == "L2") l2 = val;
    else if (key == "R_tilde") rt = val;
    else if (key == "Delta") delta = val;
    else if (key == "M") bins = static_cast<int>(val);
    else if (key == "h") h = val;
    else if (key == "a") a = val;
    else if (key == "b") b = val;
    else if (key == "a_tilde") at = val;
    else if (key == "b_tilde") bt = val;
    else if (key == "certified") certified = static_cast<int>(val);
    else if (key == "grid") grid = static_cast<int>(val);
    else throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key " + key);
  }

  AdversaryInstance fresh = construct_instance(m1, m2, l1, l2, rt);
  auto expect = [&](const char* name, double stored, double derived) {
    const double tol = 1e-9 * std::max({std::abs(stored), std::abs(derived), 1e-12});
    if (std::abs(stored - derived) > tol) {
      throw ConstraintViolation(std::string("stored ") + name + " mismatch",
                                std::to_string(stored) + " vs derived " + std::to_string(derived));
    }
  };
  expect("Delta", delta, fresh.params.delta);
  if (bins != fresh.params.num_bins) {
    throw ConstraintViolation("stored M mismatch", std::to_string(bins) + " vs derived " +
                                                       std::to_string(fresh.params.num_bins));
  }
  expect("h", h, fresh.params.h);
  expect("a", a, fresh.params.a);
  expect("b", b, fresh.params.b);
  expect("a_tilde", at, fresh.params.a_tilde);
  expect("b_tilde", bt, fresh.params.b_tilde);

  // validate the sampled table against the re-derived functions
  long row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    if (!std::getline(ls, cell, ',')) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": bad table row");
    }
    const double x = std::stod(cell);
    for (int s = 0; s <= fresh.params.num_bins; ++s) {
      if (!std::getline(ls, cell, ',')) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": truncated table row");
      }
      const double stored = std::stod(cell);
      const double derived = fresh.phi(s, x);
      if (std::abs(stored - derived) > 1e-9 * std::max(1.0, std::abs(derived))) {
        throw ConstraintViolation(
            "table value mismatch", "phi_" + std::to_string(s) + "(" + std::to_string(x) + ") = " +
                                        std::to_string(stored) + " vs derived " +
                                        std::to_string(derived));
      }
    }
    ++row;
  }
  if (row != grid + 1) {
    throw ConfigError(path + ": table has " + std::to_string(row) + " rows, header declared " +
                      std::to_string(grid + 1));
  }
  fresh.certified = certified != 0;
  return fresh;
}

}  // namespace kbandit
