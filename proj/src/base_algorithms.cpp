#include "kbandit/base_algorithms.hpp"

#include <algorithm>
#include <cmath>

namespace kbandit {

namespace {

KernelSpec kernel_from(const AlgoConfig& cfg) {
  return KernelSpec::matern(cfg.nu_input, cfg.lengthscale);
}

void validate(const AlgoConfig& cfg) {
  if (cfg.grid_size < 2) throw InvalidArgs("grid_size must be >= 2");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw InvalidArgs("delta must be in (0,1)");
  if (!(cfg.B_input > 0.0)) throw InvalidArgs("B_input must be positive");
  if (!(cfg.ucb_scale > 0.0)) throw InvalidArgs("ucb_scale must be positive");
}

}  // namespace

double gpucb_select(const PosteriorState& state, const AlgoConfig& cfg, long t) {
  if (t < 1) throw InvalidArgs("step index must be >= 1");
  validate(cfg);
  const double w =
      cfg.B_input + cfg.ucb_scale * std::sqrt(2.0 * (info_gain(state) + 1.0 + std::log(1.0 / cfg.delta)));
  const auto grid = uniform_grid(cfg.grid_size);
  double best = -1e300;
  double best_x = grid[0];
  for (double x : grid) {
    const auto [mean, var] = predict(state, x);
    const double ucb = mean + w * std::sqrt(var);
    if (ucb > best) {
      best = ucb;
      best_x = x;
    }
  }
  return best_x;
}

GpUcb::GpUcb(const AlgoConfig& cfg) : cfg_(cfg), kernel_(kernel_from(cfg)) {
  validate(cfg);
  grid_ = uniform_grid(cfg.grid_size);
  prior_ = make_grid_gram(kernel_, cfg.grid_size);
  post_ = std::make_unique<GridPosterior>(prior_, cfg.lambda);
}

double GpUcb::confidence_width() const {
  return cfg_.B_input +
         cfg_.ucb_scale * std::sqrt(2.0 * (post_->info_gain() + 1.0 + std::log(1.0 / cfg_.delta)));
}

double GpUcb::select_action(long) {
  const double w = confidence_width();
  double best = -1e300;
  int best_i = 0;
  for (int i = 0; i < static_cast<int>(grid_.size()); ++i) {
    const double ucb = post_->mean(i) + w * std::sqrt(post_->variance(i));
    if (ucb > best) {
      best = ucb;
      best_i = i;
    }
  }
  return grid_[best_i];
}

int GpUcb::grid_index_of(double x) const {
  const int n = static_cast<int>(grid_.size());
  const int i = static_cast<int>(std::lround(x * (n - 1)));
  return std::min(std::max(i, 0), n - 1);
}

void GpUcb::observe(double x, double y) { post_->observe(grid_index_of(x), y); }

void GpUcb::reset() { post_ = std::make_unique<GridPosterior>(prior_, cfg_.lambda); }

SupKernelUcb::SupKernelUcb(const AlgoConfig& cfg, long horizon)
    : cfg_(cfg), horizon_(horizon), kernel_(kernel_from(cfg)) {
  validate(cfg);
  if (horizon < 2) throw HorizonTooSmall("SupKernelUCB needs a horizon >= 2");
  num_stages_ = static_cast<int>(std::ceil(std::log2(static_cast<double>(horizon))));
  // kernel-ridge width: the RKHS bias term enters through sqrt(lambda) B
  conf_ = cfg.B_input * std::sqrt(std::max(cfg.lambda, kGramJitter)) +
          cfg.ucb_scale *
              std::sqrt(2.0 * std::log(2.0 * cfg.grid_size * static_cast<double>(horizon) / cfg.delta));
  grid_ = uniform_grid(cfg.grid_size);
  prior_ = make_grid_gram(kernel_, cfg.grid_size);
  stage_post_.resize(num_stages_ + 1);
}

GridPosterior& SupKernelUcb::stage(int s) {
  if (!stage_post_[s]) stage_post_[s] = std::make_unique<GridPosterior>(prior_, cfg_.lambda);
  return *stage_post_[s];
}

double SupKernelUcb::width(int s, int arm) { return conf_ * std::sqrt(stage(s).variance(arm)); }

std::vector<int> SupKernelUcb::active_arms(int target_stage) {
  std::vector<int> active(grid_.size());
  for (int i = 0; i < static_cast<int>(grid_.size()); ++i) active[i] = i;
  for (int s = 1; s < target_stage; ++s) {
    const double threshold = std::pow(2.0, -s);
    auto& post = stage(s);
    double best_lcb = -1e300;
    for (int arm : active) {
      best_lcb = std::max(best_lcb, post.mean(arm) - width(s, arm));
    }
    std::vector<int> next;
    next.reserve(active.size());
    for (int arm : active) {
      const double ucb = post.mean(arm) + width(s, arm);
      if (ucb >= best_lcb - 2.0 * threshold) next.push_back(arm);
    }
    active.swap(next);
  }
  return active;
}

double SupKernelUcb::select_action(long) {
  std::vector<int> active(grid_.size());
  for (int i = 0; i < static_cast<int>(grid_.size()); ++i) active[i] = i;

  for (int s = 1; s <= num_stages_; ++s) {
    const double threshold = std::pow(2.0, -s);
    auto& post = stage(s);

    // play the first arm whose stage-local width is still above 2^{-s}
    for (int arm : active) {
      if (width(s, arm) > threshold) {
        pending_stage_ = s;
        pending_arm_ = arm;
        return grid_[arm];
      }
    }

    if (s == num_stages_) break;

    // all widths resolved at this stage: drop arms whose UCB trails the best
    // LCB by more than 2*2^{-s}, then descend
    double best_lcb = -1e300;
    for (int arm : active) best_lcb = std::max(best_lcb, post.mean(arm) - width(s, arm));
    std::vector<int> next;
    next.reserve(active.size());
    for (int arm : active) {
      if (post.mean(arm) + width(s, arm) >= best_lcb - 2.0 * threshold) next.push_back(arm);
    }
    active.swap(next);
  }

  // deepest stage fully resolved: exploit the best UCB; the observation is
  // not fed to any stage
  auto& post = stage(num_stages_);
  double best = -1e300;
  int best_arm = active.empty() ? 0 : active[0];
  for (int arm : active) {
    const double ucb = post.mean(arm) + width(num_stages_, arm);
    if (ucb > best) {
      best = ucb;
      best_arm = arm;
    }
  }
  pending_stage_ = -1;
  pending_arm_ = best_arm;
  return grid_[best_arm];
}

void SupKernelUcb::observe(double x, double y) {
  if (pending_stage_ >= 1) {
    int arm = pending_arm_;
    if (arm < 0 || std::abs(grid_[arm] - x) > 1e-12) {
      arm = static_cast<int>(std::lround(x * (grid_.size() - 1)));
      arm = std::min(std::max(arm, 0), static_cast<int>(grid_.size()) - 1);
    }
    stage(pending_stage_).observe(arm, y);
  }
  pending_stage_ = -1;
  pending_arm_ = -1;
}

void SupKernelUcb::reset() {
  for (auto& p : stage_post_) p.reset();
  pending_stage_ = -1;
  pending_arm_ = -1;
}

std::vector<long> DoublingWrapper::epoch_lengths(long total_budget) {
  if (total_budget < 1) throw InvalidArgs("budget must be >= 1");
  std::vector<long> lens;
  long used = 0, len = 1;
  while (used < total_budget) {
    const long take = std::min(len, total_budget - used);
    lens.push_back(take);
    used += take;
    len *= 2;
  }
  return lens;
}

DoublingWrapper::DoublingWrapper(Factory factory, long total_budget)
    : factory_(std::move(factory)), budget_(total_budget) {
  if (total_budget < 1) throw InvalidArgs("budget must be >= 1");
  current_ = factory_(std::max<long>(epoch_len_, 2));
}

double DoublingWrapper::select_action(long) {
  if (used_in_epoch_ >= epoch_len_) {
    epoch_len_ *= 2;
    used_in_epoch_ = 0;
    local_t_ = 0;
    current_ = factory_(std::max<long>(epoch_len_, 2));
  }
  ++local_t_;
  return current_->select_action(local_t_);
}

void DoublingWrapper::observe(double x, double y) {
  current_->observe(x, y);
  ++used_in_epoch_;
}

void DoublingWrapper::reset() {
  epoch_len_ = 1;
  used_in_epoch_ = 0;
  local_t_ = 0;
  current_ = factory_(std::max<long>(epoch_len_, 2));
}

double candidate_exponent(double nu_i) { return (nu_i + 1.0) / (2.0 * nu_i + 1.0); }

double candidate_bound(double nu_i, double b_i, double t, double delta, int num_bases,
                       double scale) {
  if (t < 1.0) throw InvalidArgs("candidate_bound needs t >= 1");
  if (num_bases < 1) throw InvalidArgs("num_bases must be >= 1");
  const double beta = candidate_exponent(nu_i);
  const double log_et = std::log(M_E * t);
  return scale * std::sqrt(b_i) * std::pow(t, beta) * log_et *
         std::sqrt(std::log(num_bases * log_et / delta));
}

RegretTrace supkernelucb_run(const Environment& env, const AlgoConfig& cfg, long horizon,
                             uint64_t seed) {
  if (horizon < 2) throw HorizonTooSmall("horizon must be >= 2");
  SupKernelUcb algo(cfg, horizon);
  return run_episode(algo, env, horizon, seed);
}

}  // namespace kbandit
