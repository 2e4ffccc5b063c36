#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <string>

#include "kbandit/adversary.hpp"
#include "kbandit/config.hpp"
#include "kbandit/kernels.hpp"
#include "kbandit/metrics.hpp"

using namespace kbandit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitConstraint = 3;
constexpr int kExitNumerical = 4;

int cmd_simulate(const std::string& config_path, const std::string& out_override,
                 long seed_override, int workers_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (seed_override >= 0) cfg.seed_base = static_cast<uint64_t>(seed_override);
  if (workers_override > 0) cfg.workers = workers_override;
  const auto result = run_experiment(cfg);
  std::printf("wrote %s (%zu rows)\n", result.summary_csv_path.c_str(), result.rows.size());
  return kExitOk;
}

int cmd_adversary_build(int m1, int m2, const std::string& l1_arg, double l2, double r_tilde,
                        int target_bins, int verify_grid, int table_grid,
                        const std::string& out_path) {
  double l1;
  if (l1_arg == "auto") {
    l1 = pick_l1_for_bins(m1, m2, l2, r_tilde, target_bins);
  } else {
    l1 = parse_rational(l1_arg);
  }
  auto inst = construct_instance(m1, m2, l1, l2, r_tilde);
  const auto report = verify_conditions(inst, verify_grid);
  std::printf("m1=%d m2=%d L1=%.17g L2=%.17g R~=%.17g\n", m1, m2, l1, l2, r_tilde);
  std::printf("Delta=%.17g M=%d b=%.6g b~=%.6g sqrt(Delta R~/M)=%.6g\n", inst.params.delta,
              inst.params.num_bins, inst.params.b, inst.params.b_tilde,
              std::sqrt(inst.params.delta * r_tilde / inst.params.num_bins));
  if (!inst.certified) {
    for (const auto& f : report.failures) std::fprintf(stderr, "certification: %s\n", f.c_str());
    return kExitConstraint;
  }
  export_instance(inst, out_path, table_grid);
  std::printf("certified instance written to %s\n", out_path.c_str());
  return kExitOk;
}

int cmd_adversary_certify(const std::string& path, int verify_grid) {
  auto inst = import_instance(path);
  const auto report = verify_conditions(inst, verify_grid);
  if (!inst.certified) {
    for (const auto& f : report.failures) std::fprintf(stderr, "certification: %s\n", f.c_str());
    return kExitConstraint;
  }
  std::printf("certified: Delta=%.17g M=%d peak_err=%.3g off_bin_eq_err=%.3g min_gap=%.6g\n",
              inst.params.delta, inst.params.num_bins, report.max_peak_err,
              report.max_off_bin_eq_err, report.min_off_bin_gap);
  return kExitOk;
}

int cmd_exponents(const std::string& nu1_s, const std::string& nu2_s, const std::string& nut_s) {
  const double nu1 = parse_rational(nu1_s);
  const double nu2 = parse_rational(nu2_s);
  const double nut = parse_rational(nut_s);
  auto twice = [](double v) { return static_cast<int>(std::lround(2.0 * v)); };
  const auto mm1 = minimax_exponent(twice(nu1));
  const auto mm2 = minimax_exponent(twice(nu2));
  const auto low = lower_exponent(twice(nu1), twice(nu2));
  const auto cor = corral_exponent(twice(nut), twice(nu1));
  const auto rbb = rbbe_exponent(twice(nu1));
  std::printf("nu1=%s nu2=%s nu_tilde=%s\n", nu1_s.c_str(), nu2_s.c_str(), nut_s.c_str());
  std::printf("minimax(nu1)        = %lld/%lld = %.6f\n", mm1.num, mm1.den, mm1.value());
  std::printf("minimax(nu2)        = %lld/%lld = %.6f\n", mm2.num, mm2.den, mm2.value());
  std::printf("lower(nu1,nu2)      = %lld/%lld = %.6f\n", low.num, low.den, low.value());
  std::printf("corral(nu~,nu1)     = %lld/%lld = %.6f%s\n", cor.num, cor.den, cor.value(),
              cor == low ? "   <- matches the lower bound in T" : "");
  std::printf("rbbe(nu1)           = %lld/%lld = %.6f%s\n", rbb.num, rbb.den, rbb.value(),
              low < rbb ? "   <- above the lower bound" : "");
  return kExitOk;
}

int cmd_kernels_check(const std::string& nu_s, int grid) {
  const double nu = parse_rational(nu_s);
  const auto spec = KernelSpec::matern(nu);
  const double m_hat = empirical_fourier_decay(spec, grid);
  const double expected = fourier_decay_rate(spec);
  std::printf("nu=%s lengthscale=%.6g decay m_hat=%.4f expected=%.4f |diff|=%.4f\n", nu_s.c_str(),
              spec.lengthscale, m_hat, expected, std::abs(m_hat - expected));
  std::printf("k(0)=%.17g k(1)=%.17g spectral(0)=%.17g\n", matern_eval(spec, 0.0),
              matern_eval(spec, 1.0), matern_fourier(spec, 0.0));
  if (std::abs(m_hat - expected) > 0.1) {
    std::fprintf(stderr, "decay exponent off by more than 0.1\n");
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernelised continuum-armed bandit laboratory"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a config-driven sweep and write CSVs");
  std::string sim_config, sim_out;
  long sim_seed = -1;
  int sim_workers = 0;
  sim->add_option("config", sim_config, "experiment config file")->required();
  sim->add_option("--out", sim_out, "override output directory");
  sim->add_option("--seed", sim_seed, "override seed_base");
  sim->add_option("--workers", sim_workers, "override worker count");

  // adversary build|certify
  auto* adv = app.add_subcommand("adversary", "build or certify lower-bound instances");
  adv->require_subcommand(1);
  auto* build = adv->add_subcommand("build", "construct and certify an instance");
  int b_m1 = 1, b_m2 = 2, b_bins = 6, b_grid = 1 << 14, b_table = 4096;
  double b_l2 = 20.0, b_rt = 25.0;
  std::string b_l1 = "auto", b_out = "instance.txt";
  build->add_option("--m1", b_m1, "rough derivative order")->required();
  build->add_option("--m2", b_m2, "smooth derivative order")->required();
  build->add_option("--L1", b_l1, "rough-ball radius, or 'auto'");
  build->add_option("--L2", b_l2, "smooth-ball radius")->required();
  build->add_option("--rtilde", b_rt, "assumed regret bound on the smooth ball")->required();
  build->add_option("--target-bins", b_bins, "bin count targeted by --L1 auto");
  build->add_option("--grid", b_grid, "certification grid size");
  build->add_option("--table-grid", b_table, "sampling grid of the exported table");
  build->add_option("--out", b_out, "output artifact path");

  auto* certify = adv->add_subcommand("certify", "re-check an exported instance file");
  std::string c_path;
  int c_grid = 1 << 14;
  certify->add_option("file", c_path, "instance artifact")->required();
  certify->add_option("--grid", c_grid, "certification grid size");

  // exponents
  auto* expo = app.add_subcommand("exponents", "print the theory exponent table");
  std::string e_nu1, e_nu2, e_nut;
  expo->add_option("nu1", e_nu1, "rough regularity (e.g. 1/2)")->required();
  expo->add_option("nu2", e_nu2, "smooth regularity")->required();
  expo->add_option("nu_tilde", e_nut, "adaptive algorithm input")->required();

  // kernels check
  auto* kern = app.add_subcommand("kernels", "kernel diagnostics");
  kern->require_subcommand(1);
  auto* kcheck = kern->add_subcommand("check", "empirical Fourier-decay check");
  std::string k_nu = "3/2";
  int k_grid = 1 << 16;
  kcheck->add_option("--nu", k_nu, "regularity");
  kcheck->add_option("--grid", k_grid, "FFT grid size (power of two)");

  try {
    app.parse(argc, argv);
    if (*sim) return cmd_simulate(sim_config, sim_out, sim_seed, sim_workers);
    if (*build) {
      return cmd_adversary_build(b_m1, b_m2, b_l1, b_l2, b_rt, b_bins, b_grid, b_table, b_out);
    }
    if (*certify) return cmd_adversary_certify(c_path, c_grid);
    if (*expo) return cmd_exponents(e_nu1, e_nu2, e_nut);
    if (*kcheck) return cmd_kernels_check(k_nu, k_grid);
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const InvalidArgs& e) {
    std::fprintf(stderr, "invalid arguments: %s\n", e.what());
    return kExitConfig;
  } catch (const ConstraintViolation& e) {
    std::fprintf(stderr, "constraint violation: %s\n", e.what());
    return kExitConstraint;
  } catch (const UncertifiedInstance& e) {
    std::fprintf(stderr, "uncertified instance: %s\n", e.what());
    return kExitConstraint;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
}
