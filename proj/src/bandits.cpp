#include "ocb/bandits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ocb {
namespace {

void check_reward01(double reward) {
  if (!(reward >= 0.0 && reward <= 1.0))
    throw std::invalid_argument("bandit update: reward must lie in [0,1]");
}

// probs_i proportional to exp(-rate * loss_estimates_i), min-centered so the
// exponents are <= 0 and the sum stays finite.
void probs_from_losses(const std::vector<double>& loss_estimates, double rate,
                       std::vector<double>& probs) {
  const double bottom = *std::min_element(loss_estimates.begin(), loss_estimates.end());
  if (!std::isfinite(bottom))
    throw std::runtime_error("bandit update: non-finite loss estimate");
  double total = 0.0;
  for (std::size_t i = 0; i < loss_estimates.size(); ++i) {
    probs[i] = std::exp(-rate * (loss_estimates[i] - bottom));
    total += probs[i];
  }
  for (double& p : probs) p /= total;
}

}  // namespace

Exp3::Exp3(int arms, RngStream rng)
    : arms_(arms), loss_estimates_(arms, 0.0), probs_(arms, 0.0), rng_(rng) {
  if (arms < 1) throw std::invalid_argument("Exp3: arms must be >= 1");
}

double Exp3::learning_rate(int arms, std::int64_t round) {
  if (arms < 1 || round < 1) throw std::invalid_argument("Exp3::learning_rate: bad arguments");
  return std::sqrt(std::log(static_cast<double>(arms)) /
                   (static_cast<double>(round) * static_cast<double>(arms)));
}

void Exp3::compute_probs() {
  probs_from_losses(loss_estimates_, learning_rate(arms_, updates_ + 1), probs_);
}

int Exp3::select() {
  compute_probs();
  pending_ = rng_.sample_probs(probs_);
  return pending_;
}

void Exp3::update(int arm, double reward) {
  if (pending_ < 0) throw std::logic_error("Exp3::update: no pending select");
  if (arm != pending_) throw std::invalid_argument("Exp3::update: arm differs from pending select");
  check_reward01(reward);
  const double prob = probs_[arm];
  if (!(prob > 0.0)) throw std::runtime_error("Exp3::update: vanished arm probability");
  ++updates_;
  loss_estimates_[arm] += (1.0 - reward) / prob;
  pending_ = -1;
}

Exp3Ix::Exp3Ix(int arms, RngStream rng)
    : arms_(arms), loss_estimates_(arms, 0.0), probs_(arms, 0.0), rng_(rng) {
  if (arms < 1) throw std::invalid_argument("Exp3Ix: arms must be >= 1");
}

double Exp3Ix::learning_rate(int arms, std::int64_t round) {
  if (arms < 1 || round < 1)
    throw std::invalid_argument("Exp3Ix::learning_rate: bad arguments");
  return std::sqrt(2.0 * std::log(static_cast<double>(arms)) /
                   (static_cast<double>(arms) * static_cast<double>(round)));
}

double Exp3Ix::implicit_exploration(int arms, std::int64_t round) {
  return learning_rate(arms, round) / 2.0;
}

double Exp3Ix::regret_bound(int arms, std::int64_t horizon, double delta) {
  if (arms < 2 || horizon < 1 || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("Exp3Ix::regret_bound: bad arguments");
  const double k = static_cast<double>(arms);
  const double t = static_cast<double>(horizon);
  const double lnk = std::log(k);
  return 4.0 * std::sqrt(k * t * lnk) +
         (2.0 * std::sqrt(k * t / lnk) + 1.0) * std::log(2.0 / delta);
}

void Exp3Ix::compute_probs() {
  probs_from_losses(loss_estimates_, learning_rate(arms_, updates_ + 1), probs_);
}

int Exp3Ix::select() {
  compute_probs();
  pending_ = rng_.sample_probs(probs_);
  return pending_;
}

void Exp3Ix::update(int arm, double reward) {
  if (pending_ < 0) throw std::logic_error("Exp3Ix::update: no pending select");
  if (arm != pending_)
    throw std::invalid_argument("Exp3Ix::update: arm differs from pending select");
  check_reward01(reward);
  ++updates_;
  const double gamma = implicit_exploration(arms_, updates_);
  loss_estimates_[arm] += (1.0 - reward) / (probs_[arm] + gamma);
  pending_ = -1;
}

namespace expinf_schedule {

std::int64_t cumulative_cubes(std::int64_t i) {
  if (i < 0) throw std::invalid_argument("cumulative_cubes: negative index");
  if (i > 55000) throw std::overflow_error("cumulative_cubes: index too large for int64");
  return i * i * (i + 1) * (i + 1) / 4;
}

std::int64_t period_of(std::int64_t t) {
  if (t < 1) throw std::invalid_argument("expinf period_of: t must be >= 1");
  std::int64_t i = 1;
  while (cumulative_cubes(i) < t) ++i;
  return i;
}

std::int64_t period_start(std::int64_t i) {
  if (i < 1) throw std::invalid_argument("expinf period_start: period must be >= 1");
  return cumulative_cubes(i - 1) + 1;
}

std::int64_t period_end(std::int64_t i) {
  if (i < 1) throw std::invalid_argument("expinf period_end: period must be >= 1");
  return cumulative_cubes(i);
}

std::int64_t period_length(std::int64_t i) { return period_end(i) - period_start(i) + 1; }

}  // namespace expinf_schedule

ExpInf::ExpInf(const RngFactory& rng, std::uint64_t instance_tag)
    : rng_(rng), tag_(instance_tag) {}

int ExpInf::select_expert() {
  if (pending_ >= 0) throw std::logic_error("ExpInf::select_expert: pending update");
  ++t_;
  const std::int64_t period = expinf_schedule::period_of(t_);
  if (period != period_) {
    period_ = period;
    inner_.emplace(static_cast<int>(period),
                   rng_.stream({rtag::expinf_inner, tag_, static_cast<std::uint64_t>(period)}));
  }
  pending_ = inner_->select();
  return pending_;
}

void ExpInf::update(double reward) {
  if (pending_ < 0) throw std::logic_error("ExpInf::update: no pending select");
  inner_->update(pending_, reward);
  pending_ = -1;
}

}  // namespace ocb
