#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ocb/rng.hpp"

namespace ocb {

// Adversarial bandit over a fixed arm set, anytime learning rate
// eta_t = sqrt(ln K / (t K)). Arm probabilities at round t are
// proportional to exp(-eta_t * Lhat_i) where Lhat accumulates the
// importance-weighted loss estimates (1 - r) / prob(arm) of the chosen
// arms; exponents are min-centered so probabilities stay finite.
class Exp3 {
 public:
  Exp3(int arms, RngStream rng);

  static double learning_rate(int arms, std::int64_t round);

  int select();
  void update(int arm, double reward);

  int arms() const { return arms_; }
  std::int64_t updates() const { return updates_; }
  // Probability vector computed by the most recent select().
  const std::vector<double>& last_probs() const { return probs_; }
  const std::vector<double>& loss_estimates() const { return loss_estimates_; }

 private:
  void compute_probs();

  int arms_;
  std::int64_t updates_ = 0;
  int pending_ = -1;
  std::vector<double> loss_estimates_;
  std::vector<double> probs_;
  RngStream rng_;
};

// Bandit with implicit exploration: losses 1 - r estimated with a biased
// denominator prob + gamma_t, anytime rates eta_t = sqrt(2 ln K / (K t)),
// gamma_t = eta_t / 2. Same cumulative-estimate scheme as Exp3.
class Exp3Ix {
 public:
  Exp3Ix(int arms, RngStream rng);

  static double learning_rate(int arms, std::int64_t round);
  static double implicit_exploration(int arms, std::int64_t round);
  // High-probability regret bound at confidence 1 - delta over T rounds.
  static double regret_bound(int arms, std::int64_t horizon, double delta);

  int select();
  void update(int arm, double reward);

  int arms() const { return arms_; }
  std::int64_t updates() const { return updates_; }
  const std::vector<double>& last_probs() const { return probs_; }
  const std::vector<double>& loss_estimates() const { return loss_estimates_; }

 private:
  void compute_probs();

  int arms_;
  std::int64_t updates_ = 0;
  int pending_ = -1;
  std::vector<double> loss_estimates_;
  std::vector<double> probs_;
  RngStream rng_;
};

// Restart schedule for the infinite-expert wrapper: period i covers the i^3
// rounds after the first cumulative_cubes(i-1) rounds and admits experts
// 1..i.
namespace expinf_schedule {
// sum_{j <= i} j^3 = i^2 (i+1)^2 / 4.
std::int64_t cumulative_cubes(std::int64_t i);
// The unique i >= 1 with cumulative_cubes(i-1) < t <= cumulative_cubes(i).
std::int64_t period_of(std::int64_t t);
std::int64_t period_start(std::int64_t i);
std::int64_t period_end(std::int64_t i);
std::int64_t period_length(std::int64_t i);
}  // namespace expinf_schedule

// Learner over a countable expert sequence: during period i it runs a fresh
// implicit-exploration bandit over experts 1..i. The caller maps the chosen
// expert index (0-based) to an action. Rewards must lie in [0, 1].
class ExpInf {
 public:
  ExpInf(const RngFactory& rng, std::uint64_t instance_tag);

  // Advances the round counter and returns the chosen expert index in
  // [0, period). Must alternate with update().
  int select_expert();
  void update(double reward);

  std::int64_t round() const { return t_; }
  std::int64_t period() const { return period_; }
  int experts() const { return static_cast<int>(period_); }

 private:
  RngFactory rng_;
  std::uint64_t tag_;
  std::int64_t t_ = 0;
  std::int64_t period_ = 0;
  std::optional<Exp3Ix> inner_;
  int pending_ = -1;
};

}  // namespace ocb
