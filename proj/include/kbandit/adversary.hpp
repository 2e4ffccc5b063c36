#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kbandit/kernels.hpp"

namespace kbandit {

// Bump base function exp(-1/(1-x^2)) on (-1,1), zero elsewhere. The exponent
// underflows near |x| = 1; a guarded branch returns exact 0 for
// |x| >= 1 - 1e-12.
double bump(double x);

// Analytic m-th derivative of the bump, m in {0,...,4}: a precomputed
// rational polynomial over (1-x^2)^{2m} times the bump itself. Avoids the
// catastrophic cancellation of high-order finite differences near +-1.
double bump_derivative(int m, double x);

struct BumpConstants {
  double k0_star;   // max of the bump = e^{-1}
  double i_m1;      // int_{-1}^{1} [K0^(m1)]^2
  double i_m2;
  double c_m1;      // K0* / (2^{2 m1 - 1} sqrt(I_m1))
  double c_prime;   // 2^{2 m2 - 2} (C(m1)/32)^{(m1-1/2)/(m1+1/2)} sqrt(I_m2) / K0*
};

// Grid-refined quadrature of the derivative integrals plus the derived
// constants. Supported derivative orders: 1 <= m1 < m2 <= 4.
BumpConstants compute_constants(int m1, int m2);

struct ConstructionParams {
  int m1 = 1, m2 = 2;           // Fourier-decay / Sobolev orders, m1 < m2
  double l1 = 0, l2 = 0;        // Sobolev-ball radii
  double r_tilde = 0;           // assumed regret bound on the smoother ball
  double delta = 0;             // hypothesis peak
  int num_bins = 0;             // M (rough hypotheses); M >= 2
  double h = 0;                 // bandwidth 1/(2M)
  double a = 0, b = 0;          // rough-function amplitude / squeeze
  double a_tilde = 0, b_tilde = 0;
};

// One full lower-bound instance: bins H_0..H_M and reward functions
// phi_0..phi_M. Bin s >= 1 is [(s-1)/(2M), s/(2M)); H_0 = [1/2, 1].
struct AdversaryInstance {
  ConstructionParams params;
  bool certified = false;

  int num_bins() const { return params.num_bins; }
  double bin_lo(int s) const;
  double bin_hi(int s) const;
  double bin_mid(int s) const;     // x_bar_s; x_bar_0 = 3/4
  int bin_of(double x) const;      // index of the bin containing x in [0,1]

  double f_rough(int s, double x) const;   // f_s = a h^{m1-1/2} K0(b (x - x_bar_s)/h)
  double f_smooth(double x) const;         // f_0 = a~ h^{m2-1/2} K0(b~ (x - x_bar_0)/h)
  double phi(int s, double x) const;       // phi_0 = f_0; phi_s = f_s + f_0
  double peak(int s) const { return s == 0 ? params.delta / 2.0 : params.delta; }
};

// Builds the instance for admissible radii. The peak and bin count are the
// maximizing choices
//   Delta = (C(m1) L1)^{1/(m1+1/2)} (32 R~)^{-(m1-1/2)/(m1+1/2)},
//   M     = floor((C(m1) L1 / Delta)^{2/(2 m1 - 1)}) = floor(32 Delta R~),
// which keep b >= 2, b~ >= 4h and sqrt(Delta R~ / M) <= 1/4 satisfiable
// simultaneously. a, a~ are the exact peak-normalizing amplitudes; b, b~ sit
// at their seminorm-tight upper bounds. Throws ConstraintViolation naming the
// specific failed inequality.
AdversaryInstance construct_instance(int m1, int m2, double l1, double l2, double r_tilde);

// Admissible window for l1 given (m1, m2, l2, r_tilde).
std::pair<double, double> l1_admissible_range(int m1, int m2, double l2, double r_tilde);
// Smallest admissible l1 whose constructed instance has ~target_bins bins.
double pick_l1_for_bins(int m1, int m2, double l2, double r_tilde, int target_bins);

struct CertificationReport {
  double max_peak_err = 0;       // worst |grid peak - Delta| over s >= 1
  double peak0_err = 0;          // |grid peak of phi_0 - Delta/2|
  double worst_seminorm_excess = 0;  // max over checked functions of seminorm/radius
  double max_off_bin_eq_err = 0; // worst |phi_s - phi_0| off H_s
  double min_off_bin_gap = 0;    // min over s, x off H_s of phi_s^* - phi_s(x)
  std::vector<std::string> failures;
  bool all_ok() const { return failures.empty(); }
};

// Grid checks of the three construction conditions:
//  (1) peaks Delta and Delta/2 within 1e-6,
//  (2) |f_s|_{m1,2} <= L1 * 1.01 and |f_0|_{m2,2} <= L2 * 1.01,
//  (3) phi_s = phi_0 off H_s to 1e-12 and off-bin gap >= Delta/2 - 1e-9.
// Sets instance.certified when all pass; the report carries failures.
CertificationReport verify_conditions(AdversaryInstance& instance, int grid_size);

// m-th order Sobolev seminorm by central finite differences and trapezoid
// quadrature on [0,1]; f must be evaluable slightly beyond the interval
// (compactly supported functions extend by zero). Two-grid refinement must
// agree within 0.5%, else QuadratureNotConverged.
double sobolev_seminorm(const std::function<double(double)>& f, int m, int grid_size);

// Discrete surrogate of the Fourier-form RKHS norm,
//   sqrt( (2 pi)^{-1/2} int |f^(w)|^2 / kappa^(w) dw ),
// via a zero-padded DFT of f (supported in [0,1]). Returns the value and its
// two-grid refinement delta (relative). Degree-1 homogeneous in f.
std::pair<double, double> rkhs_norm_surrogate(const std::function<double(double)>& f,
                                              const KernelSpec& spec, int grid_size);

// Explicit-constant regret lower bound over the Sobolev hard instances:
//   (1/8) (C(m1)/32)^{(m1-1/2)/(m1+1/2)} L1^{1/(m1+1/2)} R~^{-(m1-1/2)/(m1+1/2)} T.
double lower_bound_value(int m1, double l1, double r_tilde, double horizon);

// Text artifact: header with all construction parameters, then a sampled
// table `x,phi_0,...,phi_M` on a declared grid.
void export_instance(const AdversaryInstance& instance, const std::string& path, int table_grid);
// Parses the artifact, re-derives the instance from its header parameters and
// fails (ConstraintViolation / ConfigError) on any mismatch with the stored
// values or sampled table.
AdversaryInstance import_instance(const std::string& path);

}  // namespace kbandit
