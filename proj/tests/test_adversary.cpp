#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kbandit/adversary.hpp"

using namespace kbandit;

namespace oracle {

// Independent route to the construction parameters: Simpson quadrature for
// the derivative energies (the implementation uses trapezoid) and the
// identity pre_floor = 32 Delta R~ for the bin count (the implementation
// uses the (C L1 / Delta)^{2/(2m1-1)} power form).
double simpson_energy(int m, int n) {
  const double dx = 2.0 / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = -1.0 + i * dx;
    const double v = bump_derivative(m, u);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * v * v;
  }
  return sum * dx / 3.0;
}

struct DeltaM {
  double delta;
  long bins;
};

DeltaM delta_and_bins(int m1, double l1, double r_tilde) {
  const double i_m1 = simpson_energy(m1, 1 << 16);
  const double k0s = std::exp(-1.0);
  const double c = k0s / (std::pow(2.0, 2 * m1 - 1) * std::sqrt(i_m1));
  const double delta = std::pow(c * l1, 1.0 / (m1 + 0.5)) *
                       std::pow(32.0 * r_tilde, -(m1 - 0.5) / (m1 + 0.5));
  const double q = 32.0 * delta * r_tilde;
  return {delta, static_cast<long>(std::floor(q + 1e-9))};
}

}  // namespace oracle

TEST_CASE("bump point values") {
  CHECK(bump(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(-1.0) == 0.0);
  CHECK(bump(2.0) == 0.0);
  CHECK(bump(0.5) == doctest::Approx(std::exp(-4.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("analytic bump derivatives match finite differences") {
  const double fd_h = 1e-5;
  for (int m = 1; m <= 4; ++m) {
    for (double x : {-0.7, -0.3, 0.0, 0.2, 0.55, 0.85}) {
      const double lo = bump_derivative(m - 1, x - fd_h);
      const double hi = bump_derivative(m - 1, x + fd_h);
      const double fd = (hi - lo) / (2.0 * fd_h);
      const double an = bump_derivative(m, x);
      REQUIRE(an == doctest::Approx(fd).epsilon(1e-5));
    }
    CHECK(bump_derivative(m, 1.0) == 0.0);
    CHECK(bump_derivative(m, -1.2) == 0.0);
  }
}

TEST_CASE("derivative energies and derived constants") {
  const auto c12 = compute_constants(1, 2);
  CHECK(c12.k0_star == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  // cross-check against the Simpson oracle
  CHECK(c12.i_m1 == doctest::Approx(oracle::simpson_energy(1, 1 << 16)).epsilon(1e-9));
  CHECK(c12.i_m2 == doctest::Approx(oracle::simpson_energy(2, 1 << 16)).epsilon(1e-9));
  // C(m1) carries the 1/2^{2m1-1} factor
  const auto c23 = compute_constants(2, 3);
  CHECK(c12.c_m1 == doctest::Approx(c12.k0_star / (2.0 * std::sqrt(c12.i_m1))).epsilon(1e-12));
  CHECK(c23.c_m1 == doctest::Approx(c23.k0_star / (8.0 * std::sqrt(c23.i_m1))).epsilon(1e-12));
  CHECK_THROWS_AS(compute_constants(2, 2), InvalidArgs);
  CHECK_THROWS_AS(compute_constants(0, 2), InvalidArgs);
}

TEST_CASE("spec-scale example: Delta and M against the independent oracle") {
  // L1 at the midpoint of its admissible window
  const auto [lo, hi] = l1_admissible_range(1, 2, 50.0, 200.0);
  const double l1 = 0.5 * (lo + hi);
  const auto inst = construct_instance(1, 2, l1, 50.0, 200.0);
  const auto want = oracle::delta_and_bins(1, l1, 200.0);
  CHECK(inst.params.delta == doctest::Approx(want.delta).epsilon(1e-9));
  CHECK(inst.params.num_bins == want.bins);
  // the two algebraic routes to the pre-floor bin count agree
  CHECK(32.0 * inst.params.delta * inst.params.r_tilde ==
        doctest::Approx(std::pow(compute_constants(1, 2).c_m1 * l1 / inst.params.delta, 2.0))
            .epsilon(1e-9));
  CHECK(std::sqrt(inst.params.delta * inst.params.r_tilde / inst.params.num_bins) <= 0.25 + 1e-12);
}

TEST_CASE("constraint violations carry the failed inequality") {
  // R~ small enough pushes the L1 lower bound above any fixed L1
  try {
    construct_instance(1, 2, 0.28, 20.0, 1e-6);
    FAIL("expected ConstraintViolation");
  } catch (const ConstraintViolation& e) {
    CHECK(e.constraint == "L1 lower bound");
  }
  try {
    construct_instance(1, 2, 1e9, 20.0, 25.0);
    FAIL("expected ConstraintViolation");
  } catch (const ConstraintViolation& e) {
    CHECK(e.constraint == "L1 upper bound");
  }
}

TEST_CASE("small instances certify and are refinement-stable") {
  for (auto [m1, m2, l2, rt] : std::vector<std::tuple<int, int, double, double>>{
           {1, 2, 20.0, 25.0}, {1, 3, 200.0, 25.0}, {2, 3, 80.0, 300.0}}) {
    const double l1 = pick_l1_for_bins(m1, m2, l2, rt, 6);
    auto inst = construct_instance(m1, m2, l1, l2, rt);
    CHECK(inst.params.num_bins >= 2);
    CHECK(inst.params.b >= 2.0 - 1e-9);
    CHECK(inst.params.b_tilde >= 4.0 * inst.params.h - 1e-12);
    auto rep = verify_conditions(inst, 1 << 14);
    if (!rep.all_ok()) {
      for (const auto& f : rep.failures) MESSAGE(f);
    }
    REQUIRE(inst.certified);
    auto rep2 = verify_conditions(inst, 1 << 15);
    REQUIRE(rep2.all_ok());
  }
}

TEST_CASE("supports vanish outside their bins") {
  const double l1 = pick_l1_for_bins(1, 2, 20.0, 25.0, 5);
  auto inst = construct_instance(1, 2, l1, 20.0, 25.0);
  for (int s = 1; s <= inst.num_bins(); ++s) {
    for (double x = 0.0; x <= 1.0; x += 1e-3) {
      if (x >= inst.bin_lo(s) && x < inst.bin_hi(s)) continue;
      REQUIRE(inst.f_rough(s, x) == 0.0);
    }
  }
  for (double x = 0.0; x < 0.5; x += 1e-3) REQUIRE(inst.f_smooth(x) == 0.0);
}

TEST_CASE("tampered parameters fail certification") {
  const double l1 = pick_l1_for_bins(1, 2, 20.0, 25.0, 5);
  {
    auto inst = construct_instance(1, 2, l1, 20.0, 25.0);
    inst.params.a *= 10.0;  // seminorm membership breaks
    auto rep = verify_conditions(inst, 1 << 14);
    CHECK(!inst.certified);
    bool saw_seminorm = false;
    for (const auto& f : rep.failures) saw_seminorm |= f.find("seminorm") != std::string::npos;
    CHECK(saw_seminorm);
  }
  {
    auto inst = construct_instance(1, 2, l1, 20.0, 25.0);
    inst.params.b = 1.0;  // support leaks outside H_s
    auto rep = verify_conditions(inst, 1 << 14);
    CHECK(!inst.certified);
    bool saw_off_bin = false;
    for (const auto& f : rep.failures) saw_off_bin |= f.find("off-bin") != std::string::npos;
    CHECK(saw_off_bin);
  }
}

TEST_CASE("sobolev seminorm reference values") {
  CHECK(sobolev_seminorm([](double x) { return x; }, 1, 1 << 14) ==
        doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sobolev_seminorm([](double x) { return std::sin(2.0 * M_PI * x); }, 1, 1 << 14) ==
        doctest::Approx(M_PI * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(sobolev_seminorm([](double) { return 3.7; }, 2, 1 << 14) == 0.0);
  CHECK(sobolev_seminorm([](double) { return 3.7; }, 4, 1 << 14) == 0.0);
}

TEST_CASE("rkhs surrogate: homogeneity, convergence, scale-invariant ratio") {
  const double l1 = pick_l1_for_bins(1, 2, 20.0, 25.0, 5);
  auto inst = construct_instance(1, 2, l1, 20.0, 25.0);
  auto f0 = [&](double x) { return inst.f_smooth(x); };
  const auto spec = KernelSpec::matern(inst.params.m2 - 0.5);  // kernel decay = m2

  const auto [v1, d1] = rkhs_norm_surrogate(f0, spec, 1 << 13);
  CHECK(std::isfinite(v1));
  CHECK(v1 > 0.0);
  CHECK(d1 < 0.01);

  auto f0x3 = [&](double x) { return 3.0 * inst.f_smooth(x); };
  const auto [v3, d3] = rkhs_norm_surrogate(f0x3, spec, 1 << 13);
  CHECK(v3 == doctest::Approx(3.0 * v1).epsilon(1e-12));
  (void)d3;

  // assertable form of the norm equivalency: the RKHS/Sobolev ratio is
  // invariant under amplitude scaling
  const double s1 = sobolev_seminorm(f0, inst.params.m2, 1 << 14);
  const double s3 = sobolev_seminorm(f0x3, inst.params.m2, 1 << 14);
  CHECK(v1 / s1 == doctest::Approx(v3 / s3).epsilon(1e-6));
}

TEST_CASE("interpolation-inequality constant reported across instances") {
  // |f0|_{m1} <= K |f0|_{m2}^{m1/m2} ||f0||_2^{(m2-m1)/m2}; the constant is
  // existential, so only report the fitted value and its stability.
  double fitted[2] = {0, 0};
  int idx = 0;
  for (double rt : {25.0, 40.0}) {
    const double l1 = pick_l1_for_bins(1, 2, 20.0, rt, 5);
    auto inst = construct_instance(1, 2, l1, 20.0, rt);
    auto f0 = [&](double x) { return inst.f_smooth(x); };
    const double sem1 = sobolev_seminorm(f0, 1, 1 << 14);
    const double sem2 = sobolev_seminorm(f0, 2, 1 << 14);
    double l2norm = 0.0;
    const int g = 1 << 14;
    for (int i = 0; i <= g; ++i) {
      const double v = f0(static_cast<double>(i) / g);
      l2norm += v * v;
    }
    l2norm = std::sqrt(l2norm / g);
    fitted[idx++] = sem1 / (std::sqrt(sem2) * std::sqrt(l2norm));
    CHECK(std::isfinite(fitted[idx - 1]));
    CHECK(fitted[idx - 1] > 0.0);
  }
  MESSAGE("fitted interpolation constants: ", fitted[0], " and ", fitted[1]);
}

TEST_CASE("lower bound value scalings") {
  const double base = lower_bound_value(1, 0.3, 100.0, 1024.0);
  CHECK(lower_bound_value(1, 0.3, 100.0, 2048.0) == doctest::Approx(2.0 * base).epsilon(1e-12));
  CHECK(lower_bound_value(1, 0.3, 200.0, 1024.0) ==
        doctest::Approx(base * std::pow(2.0, -(1.0 - 0.5) / (1.0 + 0.5))).epsilon(1e-12));
  // independent re-evaluation of the displayed formula
  const double i1 = oracle::simpson_energy(1, 1 << 16);
  const double c = std::exp(-1.0) / (2.0 * std::sqrt(i1));
  const double want =
      0.125 * std::pow(c / 32.0, 1.0 / 3.0) * std::pow(0.3, 1.0 / 1.5) * std::pow(100.0, -1.0 / 3.0) * 1024.0;
  CHECK(base == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("export / import round trip and corruption detection") {
  namespace fs = std::filesystem;
  const double l1 = pick_l1_for_bins(1, 2, 20.0, 25.0, 4);
  auto inst = construct_instance(1, 2, l1, 20.0, 25.0);
  verify_conditions(inst, 1 << 14);
  REQUIRE(inst.certified);

  const auto path = fs::temp_directory_path() / "kbandit_instance_test.txt";
  export_instance(inst, path.string(), 512);
  const auto back = import_instance(path.string());
  CHECK(back.params.num_bins == inst.params.num_bins);
  CHECK(back.params.delta == doctest::Approx(inst.params.delta).epsilon(1e-15));
  CHECK(back.certified);

  // corrupt one table value
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const auto pos = all.find("0.5,");
  REQUIRE(pos != std::string::npos);
  all.replace(pos, 4, "0.5,9e9#");
  // splice the corrupted value into the first phi column of that row
  const auto corrupted_path = fs::temp_directory_path() / "kbandit_instance_corrupt.txt";
  {
    std::ofstream out(corrupted_path);
    out << all;
  }
  CHECK_THROWS(import_instance(corrupted_path.string()));
  fs::remove(path);
  fs::remove(corrupted_path);
}
