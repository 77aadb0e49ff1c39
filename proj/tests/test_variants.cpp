#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ocb/rng.hpp"
#include "ocb/variants.hpp"

using namespace ocb;

namespace {

ContextPoint ctx(std::int64_t id) { return ContextPoint{id, {}}; }

const ActionSpace kLine = ActionSpace::metric_candidates({{0.0}, {0.25}, {0.75}, {1.0}});

}  // namespace

TEST_CASE("covering net tightens as the category budget grows") {
  // Budget 2^(p/4): at depth 0 only a single point is affordable.
  const NetParams p0 = covering_net(kLine, 0);
  CHECK(p0.delta == doctest::Approx(1.0));
  CHECK(p0.net == std::vector<int>{0});
  // Depth 8 (budget 4) affords two points but not four.
  const NetParams p8 = covering_net(kLine, 8);
  CHECK(p8.net == std::vector<int>{0, 2});
  CHECK(p8.delta == doctest::Approx(0.25));
  // Depth 16 (budget 16) saturates at the full candidate list.
  const NetParams p16 = covering_net(kLine, 16);
  CHECK(p16.net == std::vector<int>{0, 1, 2, 3});
  // Monotone: net sizes never shrink with the category.
  std::size_t prev = 0;
  for (int p = 0; p <= 40; ++p) {
    const NetParams np = covering_net(kLine, p);
    CHECK(np.net.size() >= prev);
    prev = np.net.size();
  }
}

TEST_CASE("covering net override and validation") {
  const NetParams fine = covering_net(kLine, 0, 1e-9);
  CHECK(fine.net == std::vector<int>{0, 1, 2, 3});
  CHECK(fine.delta == doctest::Approx(1e-9));
  CHECK_THROWS_AS(covering_net(kLine, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(covering_net(kLine, -1), std::invalid_argument);
  CHECK_THROWS_AS(covering_net(ActionSpace::finite(3), 0), std::invalid_argument);
}

TEST_CASE("covering accuracy frozen values and budget bound") {
  CHECK(covering_accuracy(4, 3) == doctest::Approx(1.815443985917585).epsilon(1e-12));
  CHECK(covering_accuracy(0, 1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(covering_accuracy(0, 0), std::invalid_argument);
  // For nets produced under the budget n ln n <= 2^(p/4), the guarantee is
  // at most 2 * 2^(-p/8).
  for (int p = 0; p <= 40; ++p) {
    const NetParams np = covering_net(kLine, p);
    const double acc = covering_accuracy(p, int(np.net.size()));
    CHECK(acc <= 2.0 * std::pow(2.0, -p / 8.0) + 1e-12);
  }
}

TEST_CASE("metric net rule matches the plain rule when the net is the identity") {
  const PolicySpace space = PolicySpace::finite({1, 2, 3}, 4);
  auto net_rule = make_uc_net_rule(kLine, space, 1e-9, RngFactory{77});
  UniversalOptions opt;
  opt.num_actions = 4;
  opt.policy_space = space;
  UniversalFiniteRule plain(opt, RngFactory{77});
  CHECK(net_rule->name() == "uc_net_rule");

  for (std::int64_t t = 1; t <= 400; ++t) {
    const std::int64_t id = 1 + (t % 3);
    const int a1 = net_rule->select(ctx(id), t);
    const int a2 = plain.select(ctx(id), t);
    CHECK(a1 == a2);
    const double r = (a1 == int(id % 4)) ? 1.0 : 0.0;
    net_rule->feed(RewardSample(r, true));
    plain.feed(RewardSample(r, true));
  }
  CHECK(net_rule->counts().total() == 400);
  CHECK_THROWS_AS(make_uc_net_rule(ActionSpace::finite(2), PolicySpace::countable(2),
                                   std::nullopt, RngFactory{1}),
                  std::invalid_argument);
}

TEST_CASE("policy rule plays enumerated policies and validates rewards") {
  PolicyExpInfRule rule(PolicySpace::countable(3), RngFactory{9}, "countable_rule");
  CHECK(rule.name() == "countable_rule");
  for (std::int64_t t = 1; t <= 300; ++t) {
    const int a = rule.select(ctx(t), t);
    CHECK(a >= 0);
    CHECK(a < 3);
    rule.feed(RewardSample(0.5, true));
  }
  rule.select(ctx(301), 301);
  CHECK_THROWS_AS(rule.feed(RewardSample(2.0, false)), std::invalid_argument);
}

TEST_CASE("per-context rule with a fixed bound rejects rewards above it") {
  PerContextExpInfRule rule(2, 2.0, RngFactory{10});
  CHECK(rule.name() == "unbounded_rule");
  const int a = rule.select(ctx(1), 1);
  CHECK(a >= 0);
  CHECK(a < 2);
  rule.feed(RewardSample(2.0, false));  // exactly at the bound is fine
  rule.select(ctx(1), 2);
  CHECK_THROWS_AS(rule.feed(RewardSample(2.5, false)), std::invalid_argument);
}

TEST_CASE("adaptive per-context rule accepts arbitrarily large rewards") {
  PerContextExpInfRule rule(3, 0.0, RngFactory{11});
  RngStream noise = RngFactory{12}.stream({1});
  for (std::int64_t t = 1; t <= 400; ++t) {
    const std::int64_t id = t % 5;
    const int a = rule.select(ctx(id), t);
    CHECK(a >= 0);
    CHECK(a < 3);
    // Growing unbounded rewards must never throw in adaptive mode.
    const double raw = noise.uniform01() * double(t);
    rule.feed(RewardSample(raw, false));
  }
}

TEST_CASE("per-context rule keeps contexts independent") {
  // Seeded identically, a rule fed on ids {1, 2} interleaved must produce
  // the same choices for id 1 as a rule that only ever sees id 1.
  PerContextExpInfRule both(2, 1.0, RngFactory{13});
  PerContextExpInfRule solo(2, 1.0, RngFactory{13});
  std::int64_t t_both = 0, t_solo = 0;
  for (int i = 0; i < 100; ++i) {
    const int a1 = both.select(ctx(1), ++t_both);
    both.feed(RewardSample(a1 == 0 ? 1.0 : 0.0, false));
    const int a_noise = both.select(ctx(2), ++t_both);
    both.feed(RewardSample(a_noise == 1 ? 0.7 : 0.1, false));

    const int a2 = solo.select(ctx(1), ++t_solo);
    solo.feed(RewardSample(a2 == 0 ? 1.0 : 0.0, false));
    CHECK(a1 == a2);
  }
}
