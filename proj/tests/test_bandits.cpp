#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ocb/bandits.hpp"
#include "ocb/rng.hpp"

using namespace ocb;

namespace {
RngStream test_stream(std::uint64_t tag) { return RngFactory{1234}.stream({tag}); }
}  // namespace

TEST_CASE("exp3 learning rate frozen values") {
  CHECK(Exp3::learning_rate(2, 1) == doctest::Approx(0.5887050112577373).epsilon(1e-12));
  CHECK(Exp3::learning_rate(5, 3) == doctest::Approx(0.3275604689655637).epsilon(1e-12));
  // Anytime schedule decays like 1/sqrt(t).
  CHECK(Exp3::learning_rate(2, 100) < Exp3::learning_rate(2, 99));
}

TEST_CASE("exp3ix rate and exploration bias frozen values") {
  CHECK(Exp3Ix::learning_rate(2, 1) == doctest::Approx(0.8325546111576977).epsilon(1e-12));
  CHECK(Exp3Ix::learning_rate(3, 7) == doctest::Approx(0.3234652095325171).epsilon(1e-12));
  CHECK(Exp3Ix::implicit_exploration(2, 4) ==
        doctest::Approx(0.20813865278942442).epsilon(1e-12));
  // gamma_t is half the learning rate at every round.
  for (std::int64_t t : {1, 2, 10, 1000})
    CHECK(Exp3Ix::implicit_exploration(4, t) ==
          doctest::Approx(Exp3Ix::learning_rate(4, t) / 2.0).epsilon(1e-12));
}

TEST_CASE("exp3ix regret bound frozen value") {
  CHECK(Exp3Ix::regret_bound(2, 2000, 0.1) ==
        doctest::Approx(668.7627461069463).epsilon(1e-12));
}

TEST_CASE("fresh bandits start uniform") {
  Exp3 e(4, test_stream(1));
  e.select();
  for (double p : e.last_probs()) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));

  Exp3Ix ix(5, test_stream(2));
  ix.select();
  for (double p : ix.last_probs()) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("single-arm bandit degenerates cleanly") {
  Exp3 e(1, test_stream(3));
  for (int t = 1; t <= 10; ++t) {
    CHECK(e.select() == 0);
    e.update(0, 1.0);
  }
  CHECK(e.updates() == 10);
}

TEST_CASE("select/update protocol violations throw") {
  Exp3 e(2, test_stream(4));
  CHECK_THROWS_AS(e.update(0, 0.5), std::logic_error);  // no pending select
  const int arm = e.select();
  CHECK_THROWS_AS(e.update(1 - arm, 0.5), std::invalid_argument);  // wrong arm
  CHECK_THROWS_AS(e.update(arm, 1.5), std::invalid_argument);  // reward > 1
  CHECK_THROWS_AS(e.update(arm, -0.1), std::invalid_argument);
  CHECK_NOTHROW(e.update(arm, 0.5));  // failed updates leave the round open
  CHECK_THROWS_AS(e.update(arm, 0.5), std::logic_error);  // round now closed

  Exp3Ix ix(2, test_stream(5));
  CHECK_THROWS_AS(ix.update(0, 0.5), std::logic_error);
  const int a2 = ix.select();
  CHECK_THROWS_AS(ix.update(a2, 2.0), std::invalid_argument);
  CHECK_NOTHROW(ix.update(a2, 1.0));

  CHECK_THROWS_AS(Exp3(0, test_stream(6)), std::invalid_argument);
}

TEST_CASE("identical seeds replay identical trajectories") {
  Exp3 a(3, test_stream(7));
  Exp3 b(3, test_stream(7));
  RngStream rewards = test_stream(8);
  for (int t = 1; t <= 200; ++t) {
    const int aa = a.select();
    const int ab = b.select();
    CHECK(aa == ab);
    const double r = rewards.uniform01();
    a.update(aa, r);
    b.update(ab, r);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(a.loss_estimates()[i] == b.loss_estimates()[i]);
  }
}

// Conditioned on the current probability vector, the importance-weighted
// loss estimate is unbiased: E[lhat_i] = (1 - r_i) for every arm i.
TEST_CASE("loss estimator is unbiased under the selection distribution") {
  const std::vector<double> true_reward{0.2, 0.5, 0.9};
  const int draws = 200000;
  std::vector<double> sum_lhat(3, 0.0);
  RngFactory root{0xB1A5};
  for (int d = 0; d < draws; ++d) {
    Exp3 e(3, root.stream({static_cast<std::uint64_t>(d)}));
    const int arm = e.select();  // uniform 1/3 on a fresh instance
    e.update(arm, true_reward[arm]);
    for (int i = 0; i < 3; ++i) sum_lhat[i] += e.loss_estimates()[i];
  }
  for (int i = 0; i < 3; ++i) {
    const double mean = sum_lhat[i] / draws;
    const double expected = 1.0 - true_reward[i];
    // Var(lhat_i) = l_i^2 (1 - p_i) / p_i with p_i = 1/3.
    const double var = expected * expected * (1.0 - 1.0 / 3.0) / (1.0 / 3.0);
    const double se = std::sqrt(var / draws);
    CHECK(std::abs(mean - expected) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("exp3 concentrates on a dominant arm") {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Exp3 e(2, RngFactory{seed}.stream({9}));
    for (int t = 1; t <= 500; ++t) {
      const int arm = e.select();
      e.update(arm, arm == 0 ? 1.0 : 0.0);
    }
    e.select();
    if (e.last_probs()[0] > 0.9) ++good;
    e.update(e.last_probs()[0] > 0.5 ? 0 : 1, 0.5);
  }
  CHECK(good >= 95);
}

TEST_CASE("exp3ix concentrates on a dominant arm") {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Exp3Ix e(2, RngFactory{seed}.stream({10}));
    for (int t = 1; t <= 500; ++t) {
      const int arm = e.select();
      e.update(arm, arm == 0 ? 1.0 : 0.0);
    }
    e.select();
    if (e.last_probs()[0] > 0.9) ++good;
    e.update(e.last_probs()[0] > 0.5 ? 0 : 1, 0.5);
  }
  CHECK(good >= 95);
}

TEST_CASE("restart schedule cube boundaries") {
  namespace es = expinf_schedule;
  CHECK(es::cumulative_cubes(0) == 0);
  CHECK(es::cumulative_cubes(1) == 1);
  CHECK(es::cumulative_cubes(2) == 9);
  CHECK(es::cumulative_cubes(3) == 36);
  CHECK(es::cumulative_cubes(4) == 100);
  CHECK(es::period_of(1) == 1);
  CHECK(es::period_of(9) == 2);
  CHECK(es::period_of(10) == 3);
  CHECK(es::period_of(36) == 3);
  CHECK(es::period_of(37) == 4);
  CHECK(es::period_start(3) == 10);
  CHECK(es::period_end(3) == 36);
  CHECK(es::period_length(3) == 27);
  CHECK_THROWS_AS(es::period_of(0), std::invalid_argument);
}

TEST_CASE("infinite-expert wrapper tracks the restart schedule") {
  ExpInf core(RngFactory{21}, 0);
  for (std::int64_t t = 1; t <= 300; ++t) {
    const int expert = core.select_expert();
    const std::int64_t period = expinf_schedule::period_of(t);
    CHECK(core.round() == t);
    CHECK(core.period() == period);
    CHECK(core.experts() == static_cast<int>(period));
    CHECK(expert >= 0);
    CHECK(expert < period);
    core.update(0.5);
  }
}

TEST_CASE("infinite-expert wrapper resets its inner bandit at boundaries") {
  // Period 2 covers rounds 2..9 over two experts. Train expert 0 hard, then
  // verify the fresh period-3 bandit is uniform over three experts again.
  ExpInf core(RngFactory{22}, 5);
  for (std::int64_t t = 1; t <= 9; ++t) {
    const int expert = core.select_expert();
    core.update(expert == 0 ? 1.0 : 0.0);
  }
  // Round 10 opens period 3: three experts, fresh uniform distribution, so
  // expert 2 must appear among repeated deterministic replays.
  ExpInf replay(RngFactory{22}, 5);
  for (std::int64_t t = 1; t <= 9; ++t) {
    const int expert = replay.select_expert();
    replay.update(expert == 0 ? 1.0 : 0.0);
  }
  CHECK(core.select_expert() == replay.select_expert());
  core.update(1.0);
  replay.update(1.0);

  // Distribution check on the first round of period 3 across seeds.
  int counts[3] = {0, 0, 0};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    ExpInf e(RngFactory{seed}, 5);
    for (std::int64_t t = 1; t <= 9; ++t) {
      const int expert = e.select_expert();
      e.update(expert == 0 ? 1.0 : 0.0);
    }
    ++counts[e.select_expert()];
    e.update(0.0);
  }
  // Fresh uniform over 3 experts: each bucket near 100.
  for (int c : counts) {
    CHECK(c > 60);
    CHECK(c < 140);
  }
  core.select_expert();
  CHECK_THROWS_AS(core.update(1.5), std::invalid_argument);
  CHECK_THROWS_AS(core.select_expert(), std::logic_error);  // still pending
}
