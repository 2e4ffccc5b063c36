#include "kbandit/regression.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace kbandit {

namespace {

double effective_lambda(double lambda) { return lambda > kGramJitter ? lambda : kGramJitter; }

}  // namespace

PosteriorState fit(const KernelSpec& kernel, std::span<const double> points,
                   std::span<const double> targets, double lambda) {
  if (points.size() != targets.size()) throw InvalidArgs("points/targets size mismatch");
  if (lambda < 0.0) throw InvalidArgs("lambda must be nonnegative");

  PosteriorState st;
  st.kernel = kernel;
  st.points.assign(points.begin(), points.end());
  st.targets.assign(targets.begin(), targets.end());
  st.lambda = lambda;
  st.lambda_eff = effective_lambda(lambda);

  const int n = st.size();
  if (n == 0) return st;

  Eigen::MatrixXd a = gram_matrix(kernel, points);
  a.diagonal().array() += st.lambda_eff + kGramJitter;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw FactorizationFailure("K + lambda I not numerically positive definite");
  }
  st.chol = llt.matrixL();
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(st.targets.data(), n);
  st.alpha = llt.solve(y);
  st.info_gain_value =
      st.chol.diagonal().array().log().sum() - 0.5 * n * std::log(st.lambda_eff);
  return st;
}

std::pair<double, double> predict(const PosteriorState& state, double x) {
  const int n = state.size();
  if (n == 0) return {0.0, matern_eval(state.kernel, 0.0)};
  Eigen::VectorXd kx(n);
  for (int i = 0; i < n; ++i) kx(i) = matern_eval(state.kernel, std::abs(x - state.points[i]));
  const double mean = kx.dot(state.alpha);
  const Eigen::VectorXd w = state.chol.triangularView<Eigen::Lower>().solve(kx);
  const double var = matern_eval(state.kernel, 0.0) - w.squaredNorm();
  return {mean, std::max(0.0, var)};
}

PosteriorState update(const PosteriorState& state, double x, double y) {
  const int n = state.size();
  PosteriorState st;
  st.kernel = state.kernel;
  st.points = state.points;
  st.points.push_back(x);
  st.targets = state.targets;
  st.targets.push_back(y);
  st.lambda = state.lambda;
  st.lambda_eff = state.lambda_eff;

  if (n == 0) return fit(st.kernel, st.points, st.targets, st.lambda);

  Eigen::VectorXd kx(n);
  for (int i = 0; i < n; ++i) kx(i) = matern_eval(st.kernel, std::abs(x - state.points[i]));
  const Eigen::VectorXd w = state.chol.triangularView<Eigen::Lower>().solve(kx);
  const double d = matern_eval(st.kernel, 0.0) + st.lambda_eff + kGramJitter - w.squaredNorm();
  if (d <= 0.0) {
    // incremental step lost positive definiteness; refit from scratch
    return fit(st.kernel, st.points, st.targets, st.lambda);
  }
  st.chol = Eigen::MatrixXd::Zero(n + 1, n + 1);
  st.chol.topLeftCorner(n, n) = state.chol;
  st.chol.block(n, 0, 1, n) = w.transpose();
  st.chol(n, n) = std::sqrt(d);

  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(st.targets.data(), n + 1);
  const Eigen::VectorXd half = st.chol.triangularView<Eigen::Lower>().solve(yv);
  st.alpha = st.chol.transpose().triangularView<Eigen::Upper>().solve(half);
  st.info_gain_value =
      st.chol.diagonal().array().log().sum() - 0.5 * (n + 1) * std::log(st.lambda_eff);
  return st;
}

double info_gain(const PosteriorState& state) { return state.info_gain_value; }

GridPosterior::GridPosterior(std::shared_ptr<const Eigen::MatrixXd> prior_gram, double lambda)
    : mean_(Eigen::VectorXd::Zero(prior_gram->rows())),
      cov_(*prior_gram),
      lambda_(effective_lambda(lambda)) {}

void GridPosterior::observe(int j, double y) {
  const double var_j = std::max(0.0, cov_(j, j));
  const double denom = var_j + lambda_;
  const Eigen::VectorXd g = cov_.col(j);
  mean_.noalias() += g * ((y - mean_(j)) / denom);
  cov_.noalias() -= g * (g.transpose() / denom);
  info_gain_ += 0.5 * std::log1p(var_j / lambda_);
  ++n_obs_;
}

std::vector<double> uniform_grid(int n) {
  if (n < 2) throw InvalidArgs("grid needs at least 2 points");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = static_cast<double>(i) / (n - 1);
  return g;
}

std::shared_ptr<const Eigen::MatrixXd> make_grid_gram(const KernelSpec& kernel, int n) {
  const auto grid = uniform_grid(n);
  return std::make_shared<const Eigen::MatrixXd>(gram_matrix(kernel, grid));
}

}  // namespace kbandit
