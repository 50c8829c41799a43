#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "riskdiv/oracle.hpp"
#include "helpers.hpp"

using namespace riskdiv;
using namespace riskdiv::oracle;

namespace {

IncomeDistribution sym() { return validate_distribution({{-1, 0.5}, {1, 0.5}}); }

}  // namespace

TEST(Oracle, PathProbabilitiesSumToOneExactly) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 5; ++t) {
    auto d = fixtures::random_distribution(rng, 4);
    for (int h = 0; h <= 5; ++h) EXPECT_EQ(path_probability_sum(d, h), Rational(1));
  }
  auto q = exact_probabilities(validate_distribution({{-1, 0.1}, {0, 0.2}, {1, 0.7}}));
  Rational s = 0;
  for (auto& r : q) s += r;
  EXPECT_EQ(s, Rational(1));
}

TEST(Oracle, FiniteHorizonByHand) {
  auto cfg = fixtures::exp_config(sym(), 0.5, -1.0, 4);
  auto p1 = exp_problem_finite(cfg, 1);
  OracleResult r1 = exact_optimal(p1, 1);
  EXPECT_NEAR(static_cast<double>(r1.value), std::exp(-1.0), 1e-18);
  EXPECT_EQ(r1.action, 1);

  // pay now, then pay the next unit if it arrives: 0.5 e^{-1} + 0.5 e^{-1.5};
  // waiting gives 0.5 + 0.5 e^{-1}
  auto p2 = exp_problem_finite(cfg, 2);
  OracleResult r2 = exact_optimal(p2, 1);
  EXPECT_NEAR(static_cast<double>(r2.value), 0.5 * std::exp(-1.0) + 0.5 * std::exp(-1.5), 1e-18);
  EXPECT_EQ(r2.action, 1);
  // 1 root, 2 actions x 2 incomes below it, each child either ruined, a leaf or a second step
  EXPECT_EQ(count_nodes(p2, 1), r2.nodes);
}

TEST(Oracle, CertainLossPaysEverything) {
  auto cfg = fixtures::exp_config(fixtures::always_minus_one(), 0.9, -0.5, 6);
  for (int h = 1; h <= 4; ++h)
    for (int x0 = 0; x0 <= 5; ++x0) {
      OracleResult r = exact_optimal(exp_problem_finite(cfg, h), x0);
      EXPECT_NEAR(static_cast<double>(r.value), std::exp(-0.5 * x0), 1e-17);
      EXPECT_EQ(r.action, x0);
    }
  auto pc = fixtures::power_config(fixtures::always_minus_one(), 0.8, 0.3, 4, 3);
  for (int x0 = 0; x0 <= 4; ++x0) {
    OracleResult r = exact_optimal(power_problem(pc, 3, TailEnd::Lower), x0);
    EXPECT_NEAR(static_cast<double>(r.value), std::pow(x0, 0.3), 1e-17);
  }
}

// exp(gamma (a + beta S')) = exp(gamma a) exp(gamma beta S'): the tree value
// with s0 shifted equals exp(gamma s0) times the unshifted value.
TEST(Oracle, ExponentialSeparatesInAccumulatedSum) {
  auto cfg = fixtures::exp_config(validate_distribution({{-1, 0.4}, {2, 0.6}}), 0.7, -0.8, 6);
  auto p = exp_problem_finite(cfg, 3);
  auto shifted = p;
  shifted.s0 = 1.25L;
  for (int x0 = 0; x0 <= 3; ++x0) {
    Real a = exact_optimal(p, x0).value, b = exact_optimal(shifted, x0).value;
    EXPECT_NEAR(static_cast<double>(b), static_cast<double>(std::exp(-0.8L * 1.25L) * a), 1e-16);
  }
}

TEST(Oracle, HorizonZeroIsTheLeaf) {
  auto pc = fixtures::power_config(sym(), 0.5, 0.5, 4, 3);
  for (int x0 = 0; x0 <= 4; ++x0) {
    EXPECT_EQ(exact_optimal(power_problem(pc, 0, TailEnd::Lower), x0).value, std::sqrt(static_cast<Real>(x0)));
    Real c = 0.5L * 0.5L / 0.5L;
    EXPECT_NEAR(static_cast<double>(exact_optimal(power_problem(pc, 0, TailEnd::Upper), x0).value),
                std::sqrt(x0 + static_cast<double>(c)), 1e-18);
  }
}

TEST(Oracle, PolicyValueOfOptimalRuleEqualsOptimum) {
  auto cfg = fixtures::exp_config(sym(), 0.5, -1.0, 4);
  auto p = exp_problem_finite(cfg, 3);
  // Memoise the optimal first action at every (t, x, s) by re-solving the subtree.
  HistoryPolicy best = [&](const History& h, int x) {
    auto sub = p;
    sub.horizon = p.horizon - h.depth();
    Real s = p.s0, b = 1.0L;
    for (int a : h.actions) {
      s += a * b;
      b *= 0.5L;
    }
    // a subtree at depth t sees beta^t scaled payouts: fold it into the utility
    Real bt = b;
    sub.s0 = 0.0L;
    sub.ruin = [&, s, bt](Real r) { return p.ruin(s + bt * r); };
    sub.leaf = [&, s, bt](int y, Real r) { return p.leaf(y, s + bt * r); };
    return exact_optimal(sub, x).action;
  };
  for (int x0 = 0; x0 <= 3; ++x0)
    EXPECT_NEAR(static_cast<double>(exact_policy_value(p, best, x0)), static_cast<double>(exact_optimal(p, x0).value),
                1e-17);
}

TEST(Oracle, PolicyOutsideActionSetIsReported) {
  auto cfg = fixtures::exp_config(sym(), 0.5, -1.0, 4);
  auto p = exp_problem_finite(cfg, 2);
  HistoryPolicy bad = [](const History&, int x) { return x + 1; };
  try {
    exact_policy_value(p, bad, 1);
    FAIL() << "expected UndefinedAction";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UndefinedAction);
  }
}

TEST(Oracle, TooLargeTreeIsRefused) {
  auto cfg = fixtures::exp_config(sym(), 0.5, -1.0, 4);
  auto p = exp_problem_finite(cfg, 8);
  OracleOptions opt;
  opt.max_nodes = 1000;
  try {
    exact_optimal(p, 6, opt);
    FAIL() << "expected TooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
  EXPECT_GT(count_nodes(p, 6, 1000), 1000);
}

TEST(Oracle, JsonDumpFollowsOptimalActions) {
  auto cfg = fixtures::exp_config(sym(), 0.5, -1.0, 4);
  OracleOptions opt;
  opt.dump_depth = 1;
  OracleResult r = exact_optimal(exp_problem_finite(cfg, 2), 1, opt);
  ASSERT_TRUE(r.tree.is_object());
  EXPECT_EQ(r.tree["action"], 1);
  EXPECT_EQ(r.tree["x"], 1);
  ASSERT_EQ(r.tree["children"].size(), 2u);
  double v = 0.0;
  for (auto& c : r.tree["children"]) {
    v += c["prob"].get<double>() * c["node"]["value"].get<double>();
    EXPECT_FALSE(c["node"].contains("children"));
  }
  EXPECT_NEAR(v, static_cast<double>(r.value), 1e-15);
  // the dump does not change the node count
  EXPECT_EQ(r.nodes, exact_optimal(exp_problem_finite(cfg, 2), 1).nodes);
}

TEST(Oracle, WrongUtilityRejected) {
  auto cfg = fixtures::exp_config(sym(), 0.5, -1.0, 4);
  EXPECT_THROW(power_problem(cfg, 2, TailEnd::Lower), Error);
}
