#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "kbandit/regression.hpp"

using namespace kbandit;

namespace {

// dense-solve oracle: mu(x) = k_x^T (K + lambda I)^{-1} y, independent of the
// factored path
std::pair<double, double> dense_predict(const KernelSpec& kernel, const std::vector<double>& pts,
                                        const std::vector<double>& y, double lambda, double x) {
  const int n = static_cast<int>(pts.size());
  if (n == 0) return {0.0, 1.0};
  Eigen::MatrixXd a = gram_matrix(kernel, pts);
  const double le = std::max(lambda, kGramJitter);
  a.diagonal().array() += le + kGramJitter;
  Eigen::VectorXd kx(n), yv(n);
  for (int i = 0; i < n; ++i) {
    kx(i) = matern_eval(kernel, std::abs(x - pts[i]));
    yv(i) = y[i];
  }
  const Eigen::VectorXd sol = a.fullPivLu().solve(kx);
  const double mean = yv.dot(sol);
  const double var = matern_eval(kernel, 0.0) - kx.dot(sol);
  return {mean, var};
}

}  // namespace

TEST_CASE("empty posterior is the prior") {
  const auto spec = KernelSpec::matern(1.5);
  const auto st = fit(spec, {}, {}, 0.25);
  const auto [mean, var] = predict(st, 0.3);
  CHECK(mean == 0.0);
  CHECK(var == doctest::Approx(1.0));
  CHECK(info_gain(st) == 0.0);
}

TEST_CASE("single observation interpolates at lambda = 0") {
  const auto spec = KernelSpec::matern(0.5);
  const double xs[] = {0.4}, ys[] = {1.7};
  const auto st = fit(spec, xs, ys, 0.0);
  const auto [mean, var] = predict(st, 0.4);
  CHECK(mean == doctest::Approx(1.7).epsilon(1e-8));
  CHECK(var <= 1e-6);
}

TEST_CASE("cholesky factor reproduces K + lambda I") {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto spec = KernelSpec::matern(2.5);
  for (int n : {5, 40, 120}) {
    std::vector<double> pts(n), ys(n);
    for (int i = 0; i < n; ++i) {
      pts[i] = unif(gen);
      ys[i] = unif(gen);
    }
    const auto st = fit(spec, pts, ys, 0.25);
    Eigen::MatrixXd target = gram_matrix(spec, pts);
    target.diagonal().array() += st.lambda_eff + kGramJitter;
    const Eigen::MatrixXd rebuilt =
        st.chol.triangularView<Eigen::Lower>() * st.chol.transpose();
    REQUIRE((rebuilt - target).norm() / target.norm() <= 1e-8);
  }
}

TEST_CASE("factored predict equals dense solve") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto spec = KernelSpec::matern(1.5);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 50;
    std::vector<double> pts(n), ys(n);
    for (int i = 0; i < n; ++i) {
      pts[i] = unif(gen);
      ys[i] = gauss(gen);
    }
    const auto st = fit(spec, pts, ys, 0.25);
    for (int q = 0; q < 10; ++q) {
      const double x = unif(gen);
      const auto [m1, v1] = predict(st, x);
      const auto [m2, v2] = dense_predict(spec, pts, ys, 0.25, x);
      REQUIRE(m1 == doctest::Approx(m2).epsilon(1e-8));
      REQUIRE(v1 == doctest::Approx(v2).epsilon(1e-8));
    }
  }
}

TEST_CASE("variance bounds and symmetry") {
  const auto spec = KernelSpec::matern(2.5);
  // symmetric data about x = 1/2
  const double xs[] = {0.2, 0.8, 0.35, 0.65};
  const double ys[] = {1.0, 1.0, -0.5, -0.5};
  const auto st = fit(spec, xs, ys, 0.25);
  for (double t = 0.0; t <= 0.45; t += 0.05) {
    const auto [ml, vl] = predict(st, 0.5 - t);
    const auto [mr, vr] = predict(st, 0.5 + t);
    CHECK(ml == doctest::Approx(mr).epsilon(1e-10));
    CHECK(vl == doctest::Approx(vr).epsilon(1e-10));
    CHECK(vl >= 0.0);
    CHECK(vl <= 1.0 + 0.25);
  }
}

TEST_CASE("variance shrinks when data is added") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto spec = KernelSpec::matern(1.5);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + rep % 7;
    std::vector<double> pts(n), ys(n);
    for (int i = 0; i < n; ++i) {
      pts[i] = unif(gen);
      ys[i] = unif(gen);
    }
    const auto before = fit(spec, pts, ys, 0.25);
    const double q = unif(gen);
    const double v0 = predict(before, q).second;
    const auto after = update(before, unif(gen), unif(gen));
    const double v1 = predict(after, q).second;
    REQUIRE(v1 <= v0 + 1e-10);
  }
}

TEST_CASE("sequential updates equal one batch fit") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto spec = KernelSpec::matern(0.5);
  const int n = 30;
  std::vector<double> pts(n), ys(n);
  for (int i = 0; i < n; ++i) {
    pts[i] = unif(gen);
    ys[i] = 2.0 * unif(gen) - 1.0;
  }
  auto inc = fit(spec, {}, {}, 0.25);
  CHECK(update(inc, pts[0], ys[0]).points == fit(spec, {{pts[0]}}, {{ys[0]}}, 0.25).points);
  for (int i = 0; i < n; ++i) inc = update(inc, pts[i], ys[i]);
  const auto batch = fit(spec, pts, ys, 0.25);
  for (double x : {0.1, 0.33, 0.5, 0.77, 0.99}) {
    const auto [mi, vi] = predict(inc, x);
    const auto [mb, vb] = predict(batch, x);
    REQUIRE(mi == doctest::Approx(mb).epsilon(1e-8));
    REQUIRE(vi == doctest::Approx(vb).epsilon(1e-8));
  }
  CHECK(info_gain(inc) == doctest::Approx(info_gain(batch)).epsilon(1e-8));
}

TEST_CASE("one-point posterior matches the closed form") {
  const auto spec = KernelSpec::matern(1.5);
  const double lambda = 0.25, y = 0.9, x = 0.6;
  auto st = update(fit(spec, {}, {}, lambda), x, y);
  // mean at x is y shrunk by k(0)/(k(0)+lambda)
  CHECK(predict(st, x).first == doctest::Approx(y / (1.0 + lambda)).epsilon(1e-10));
}

TEST_CASE("info gain: scalar case and monotonicity") {
  const auto spec = KernelSpec::matern(0.5);
  const double xs[] = {0.5}, ys[] = {1.0};
  const auto one = fit(spec, xs, ys, 1.0);
  CHECK(info_gain(one) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-9));

  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    auto st = fit(spec, {}, {}, 0.25);
    double prev = 0.0;
    for (int i = 0; i < 12; ++i) {
      st = update(st, unif(gen), unif(gen));
      // recompute from scratch as the oracle
      const auto scratch = fit(spec, st.points, st.targets, 0.25);
      REQUIRE(info_gain(st) == doctest::Approx(info_gain(scratch)).epsilon(1e-8));
      REQUIRE(info_gain(st) >= prev - 1e-12);
      prev = info_gain(st);
    }
  }
}

TEST_CASE("grid posterior matches the factored posterior") {
  const auto spec = KernelSpec::matern(1.5);
  const int n = 33;
  const auto grid = uniform_grid(n);
  GridPosterior gp(make_grid_gram(spec, n), 0.25);
  auto st = fit(spec, {}, {}, 0.25);
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int step = 0; step < 60; ++step) {
    const int j = pick(gen);
    const double y = gauss(gen);
    gp.observe(j, y);
    st = update(st, grid[j], y);
    REQUIRE(gp.info_gain() == doctest::Approx(info_gain(st)).epsilon(1e-7));
  }
  for (int i = 0; i < n; ++i) {
    const auto [m, v] = predict(st, grid[i]);
    REQUIRE(gp.mean(i) == doctest::Approx(m).epsilon(1e-7));
    REQUIRE(gp.variance(i) == doctest::Approx(v).epsilon(1e-6));
  }
}
