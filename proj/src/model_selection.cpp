#include "kbandit/model_selection.hpp"

#include <algorithm>
#include <cmath>

#include "kbandit/base_algorithms.hpp"

namespace kbandit {

CorralState corral_init(double nu_tilde, long horizon, int num_bases, double reward_min,
                        double reward_max, double eta_override) {
  if (num_bases < 2) throw InvalidArgs("CORRAL needs at least two bases");
  if (horizon < num_bases) throw InvalidArgs("horizon must be >= number of bases");
  if (!(reward_max > reward_min)) throw InvalidArgs("reward range is empty");
  CorralState st;
  st.num_bases = num_bases;
  st.p.assign(num_bases, 1.0 / num_bases);
  const double eta =
      eta_override > 0.0
          ? eta_override
          : std::pow(static_cast<double>(horizon), -(1.0 + nu_tilde) / (1.0 + 2.0 * nu_tilde));
  st.eta.assign(num_bases, eta);
  st.rho.assign(num_bases, 2.0 * num_bases);
  st.gamma = 1.0 / static_cast<double>(horizon);
  st.horizon = horizon;
  st.reward_min = reward_min;
  st.reward_max = reward_max;
  return st;
}

namespace {

// Solves sum_j 1/(1/p_j + eta_j (l_j - lambda)) = 1 for lambda by bisection.
// The sum is increasing in lambda; a nonpositive denominator means lambda
// overshot a pole, treated as sum = +inf.
double log_barrier_normalizer(const std::vector<double>& p, const std::vector<double>& eta,
                              const std::vector<double>& losses) {
  const int m = static_cast<int>(p.size());
  double lo = losses[0], hi = losses[0];
  for (double l : losses) {
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  if (hi - lo < 1e-18) return lo;

  auto sum_at = [&](double lambda) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      const double denom = 1.0 / p[j] + eta[j] * (losses[j] - lambda);
      if (denom <= 0.0) return 1e300;
      s += 1.0 / denom;
    }
    return s;
  };

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = sum_at(mid);
    if (std::abs(s - 1.0) <= 1e-10) return mid;
    if (s < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double mid = 0.5 * (lo + hi);
  if (std::abs(sum_at(mid) - 1.0) <= 1e-10) return mid;
  throw NormalizerNotFound("log-barrier bisection did not reach 1e-10 in 200 iterations");
}

}  // namespace

std::vector<int> corral_update(CorralState& st, int chosen, double raw_reward) {
  if (chosen < 0 || chosen >= st.num_bases) throw InvalidArgs("chosen base out of range");
  const double mapped = (raw_reward - st.reward_min) / (st.reward_max - st.reward_min);
  if (mapped < -0.5 || mapped > 1.5) {
    throw RewardOutOfRange("mapped reward " + std::to_string(mapped) +
                           " outside [-0.5, 1.5]; reward range misconfigured");
  }
  const double loss = 1.0 - std::clamp(mapped, 0.0, 1.0);

  std::vector<double> loss_est(st.num_bases, 0.0);
  loss_est[chosen] = loss / st.p[chosen];

  const double lambda = log_barrier_normalizer(st.p, st.eta, loss_est);
  for (int j = 0; j < st.num_bases; ++j) {
    st.p[j] = 1.0 / (1.0 / st.p[j] + st.eta[j] * (loss_est[j] - lambda));
  }
  // uniform mixing keeps every weight at or above gamma/M
  for (int j = 0; j < st.num_bases; ++j) {
    st.p[j] = (1.0 - st.gamma) * st.p[j] + st.gamma / st.num_bases;
  }

  std::vector<int> restarted;
  const double inflate = std::exp(1.0 / std::log(static_cast<double>(st.horizon)));
  for (int j = 0; j < st.num_bases; ++j) {
    if (1.0 / st.p[j] > st.rho[j]) {
      st.rho[j] = 2.0 / st.p[j];
      st.eta[j] *= inflate;
      restarted.push_back(j);
      ++st.restarts_total;
    }
  }
  return restarted;
}

CorralMaster::CorralMaster(std::vector<std::unique_ptr<BanditAlgorithm>> bases, double nu_tilde,
                           long horizon, uint64_t seed, double reward_min, double reward_max,
                           double eta_override)
    : bases_(std::move(bases)),
      nu_tilde_(nu_tilde),
      eta_override_(eta_override),
      rng_(mix_key(hash_id("corral"), seed)),
      seed_(seed) {
  state_ = corral_init(nu_tilde, horizon, static_cast<int>(bases_.size()), reward_min,
                       reward_max, eta_override);
  base_clock_.assign(bases_.size(), 0);
  plays_.assign(bases_.size(), 0);
}

double CorralMaster::select_action(long) {
  pending_ = rng_.categorical(state_.p);
  ++base_clock_[pending_];
  ++plays_[pending_];
  return bases_[pending_]->select_action(base_clock_[pending_]);
}

void CorralMaster::observe(double x, double y) {
  if (pending_ < 0) throw InvalidArgs("observe without a pending action");
  bases_[pending_]->observe(x, y);
  const auto restarted = corral_update(state_, pending_, y);
  for (int j : restarted) {
    bases_[j]->reset();
    base_clock_[j] = 0;
  }
  pending_ = -1;
}

void CorralMaster::reset() {
  state_ = corral_init(nu_tilde_, state_.horizon, static_cast<int>(bases_.size()),
                       state_.reward_min, state_.reward_max, eta_override_);
  rng_ = CounterRng(mix_key(hash_id("corral"), seed_));
  for (auto& b : bases_) b->reset();
  base_clock_.assign(bases_.size(), 0);
  plays_.assign(bases_.size(), 0);
  pending_ = -1;
}

bool RbbeState::is_active(int i) const {
  return std::find(active.begin(), active.end(), i) != active.end();
}

RbbeState rbbe_init(const std::vector<std::pair<double, double>>& candidates, double delta,
                    double bound_scale) {
  if (candidates.size() < 1) throw InvalidArgs("RBBE needs at least one base");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgs("delta must be in (0,1)");
  RbbeState st;
  const int m = static_cast<int>(candidates.size());
  st.plays.assign(m, 0);
  st.cum_reward.assign(m, 0.0);
  st.delta = delta;
  st.bound_scale = bound_scale;
  for (int i = 0; i < m; ++i) {
    st.active.push_back(i);
    st.nu.push_back(candidates[i].first);
    st.radius.push_back(candidates[i].second);
  }
  return st;
}

double rbbe_bound(const RbbeState& st, int i, long n) {
  return candidate_bound(st.nu[i], st.radius[i], static_cast<double>(std::max<long>(n, 1)),
                         st.delta, st.num_bases(), st.bound_scale);
}

int rbbe_select(const RbbeState& st, long) {
  if (st.active.empty()) throw InvalidArgs("active set is empty");
  int best = st.active.front();
  double best_bound = rbbe_bound(st, best, st.plays[best]);
  for (int i : st.active) {
    const double b = rbbe_bound(st, i, st.plays[i]);
    if (b < best_bound - 1e-15) {
      best = i;
      best_bound = b;
    }
  }
  return best;
}

double rbbe_confidence(long n, long t, int num_bases, double delta) {
  if (n < 1) throw InvalidArgs("confidence radius needs n >= 1");
  const double log_arg = num_bases * std::log(M_E * static_cast<double>(std::max<long>(t, 1))) / delta;
  return std::sqrt(std::log(log_arg) / (2.0 * static_cast<double>(n)));
}

std::vector<int> rbbe_eliminate(RbbeState& st, long t) {
  std::vector<int> removed;
  if (st.active.size() <= 1) return removed;

  double best_lcb = -1e300;
  for (int j : st.active) {
    if (st.plays[j] < 1) continue;
    const double mean_j = st.cum_reward[j] / st.plays[j];
    best_lcb = std::max(best_lcb, mean_j - rbbe_confidence(st.plays[j], t, st.num_bases(), st.delta));
  }
  if (best_lcb <= -1e299) return removed;

  std::vector<int> keep;
  for (int i : st.active) {
    if (st.plays[i] < 1) {
      keep.push_back(i);  // unplayed bases are never eliminated
      continue;
    }
    const double n_i = static_cast<double>(st.plays[i]);
    const double mean_i = st.cum_reward[i] / n_i;
    const double ucb = mean_i + rbbe_bound(st, i, st.plays[i]) / n_i +
                       rbbe_confidence(st.plays[i], t, st.num_bases(), st.delta);
    if (ucb < best_lcb && st.active.size() - removed.size() > 1) {
      removed.push_back(i);
    } else {
      keep.push_back(i);
    }
  }
  st.active.swap(keep);
  return removed;
}

double play_ratio_bound(double theta_i, double theta_j, double beta_i, double beta_j,
                        double n_j) {
  if (!(beta_i >= 0.5 && beta_i < 1.0 && beta_j >= 0.5 && beta_j < 1.0)) {
    throw InvalidArgs("betas must lie in [1/2, 1)");
  }
  if (theta_i < 1.0 || theta_j < 1.0) throw InvalidArgs("thetas must be >= 1");
  if (n_j < 1.0) throw InvalidArgs("n_j must be >= 1");
  const double first = std::pow(2.0 * theta_j / theta_i, 1.0 / beta_i) *
                       std::pow(n_j, beta_j / beta_i - 1.0);
  return std::max(first, 2.0);
}

RbbeMaster::RbbeMaster(std::vector<std::unique_ptr<BanditAlgorithm>> bases,
                       const std::vector<std::pair<double, double>>& candidates, double delta,
                       double bound_scale)
    : bases_(std::move(bases)), candidates_(candidates), delta_(delta),
      bound_scale_(bound_scale) {
  if (bases_.size() != candidates.size()) throw InvalidArgs("bases/candidates size mismatch");
  state_ = rbbe_init(candidates, delta, bound_scale);
  base_clock_.assign(bases_.size(), 0);
}

double RbbeMaster::select_action(long t) {
  rbbe_eliminate(state_, std::max<long>(state_.t, 1));
  pending_ = rbbe_select(state_, t);
  ++base_clock_[pending_];
  return bases_[pending_]->select_action(base_clock_[pending_]);
}

void RbbeMaster::observe(double x, double y) {
  if (pending_ < 0) throw InvalidArgs("observe without a pending action");
  bases_[pending_]->observe(x, y);
  ++state_.plays[pending_];
  state_.cum_reward[pending_] += y;
  ++state_.t;
  pending_ = -1;
}

void RbbeMaster::reset() {
  state_ = rbbe_init(candidates_, delta_, bound_scale_);
  for (auto& b : bases_) b->reset();
  base_clock_.assign(bases_.size(), 0);
  pending_ = -1;
}

}  // namespace kbandit
