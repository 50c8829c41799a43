#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <set>

#include "riskdiv/exp_solver.hpp"
#include "riskdiv/parallel.hpp"
#include "riskdiv/simulate.hpp"
#include "helpers.hpp"

using namespace riskdiv;

namespace {

ProblemConfig exp_instance() {
  auto cfg = fixtures::exp_config(two_point_distribution(0.6, 1), 0.9, -0.5, 50);
  return cfg;
}

}  // namespace

TEST(PathSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t p = 0; p < 1000; ++p) seen.insert(path_seed(7, p));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(path_seed(7, 0), path_seed(8, 0));
  EXPECT_EQ(path_seed(7, 3), path_seed(7, 3));
}

TEST(PairwiseSum, MatchesCompensatedSum) {
  std::vector<double> v(10001);
  for (size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / static_cast<double>(i + 1);
  long double ref = 0.0L;
  for (double x : v) ref += x;
  EXPECT_NEAR(pairwise_sum(v.data(), v.size()), static_cast<double>(ref), 1e-13);
  EXPECT_EQ(pairwise_sum(v.data(), 0), 0.0);
}

TEST(Simulate, CertainLossPayAll) {
  auto cfg = fixtures::exp_config(fixtures::always_minus_one(), 0.9, -1.0, 5);
  SimulationOptions opt;
  opt.x0 = 3;
  opt.n_paths = 100;
  opt.keep_paths = true;
  SimulationResult r = simulate_paths(cfg, pay_all_fn(), opt);
  EXPECT_DOUBLE_EQ(r.mean_utility, -std::exp(-3.0));
  EXPECT_NEAR(r.std_err, 0.0, 1e-15);
  EXPECT_EQ(r.ruin_fraction, 1.0);
  EXPECT_EQ(r.mean_ruin_time, 1.0);
  for (double s : r.discounted_sum) EXPECT_EQ(s, 3.0);
}

TEST(Simulate, DeterministicAcrossRunsAndThreads) {
  auto cfg = exp_instance();
  ExpSolution sol = solve_exp(cfg);
  SimulationOptions opt;
  opt.x0 = 5;
  opt.n_paths = 20000;
  opt.seed = 99;
  opt.keep_paths = true;
  set_thread_count(1);
  SimulationResult a = simulate_paths(cfg, exp_policy_fn(sol.policy), opt);
  set_thread_count(4);
  SimulationResult b = simulate_paths(cfg, exp_policy_fn(sol.policy), opt);
  SimulationResult c = simulate_paths(cfg, exp_policy_fn(sol.policy), opt);
  set_thread_count(0);
  for (const auto* o : {&b, &c}) {
    EXPECT_EQ(std::memcmp(&a.mean_utility, &o->mean_utility, sizeof(double)), 0);
    EXPECT_EQ(a.std_err, o->std_err);
    EXPECT_EQ(a.ruin_fraction, o->ruin_fraction);
    EXPECT_EQ(a.discounted_sum, o->discounted_sum);
    EXPECT_EQ(a.ruin_time, o->ruin_time);
  }
  opt.seed = 100;
  SimulationResult d = simulate_paths(cfg, exp_policy_fn(sol.policy), opt);
  EXPECT_NE(a.mean_utility, d.mean_utility);
}

TEST(Simulate, StandardErrorHalvesWithFourTimesThePaths) {
  auto cfg = exp_instance();
  ExpSolution sol = solve_exp(cfg);
  SimulationOptions opt;
  opt.x0 = 2;
  opt.n_paths = 20000;
  opt.seed = 5;
  double se1 = simulate_paths(cfg, exp_policy_fn(sol.policy), opt).std_err;
  opt.n_paths = 80000;
  double se4 = simulate_paths(cfg, exp_policy_fn(sol.policy), opt).std_err;
  double ratio = se1 / se4;
  EXPECT_GE(ratio, 1.7);
  EXPECT_LE(ratio, 2.3);
}

TEST(Simulate, MonteCarloInsideSolverBracket) {
  auto cfg = exp_instance();
  ExpSolution sol = solve_exp(cfg);
  SimulationOptions opt;
  opt.n_paths = 1'000'000;
  opt.seed = 2024;
  for (int x0 : {0, 5, 20}) {
    opt.x0 = x0;
    SimulationResult r = simulate_paths(cfg, exp_policy_fn(sol.policy), opt);
    // mean utility is E exp(gamma S) / gamma; the bracket encloses E exp(gamma S)
    double lo = sol.values.hi(0, x0) / cfg.gamma, hi = sol.values.lo(0, x0) / cfg.gamma;
    EXPECT_GE(r.mean_utility, lo - 4 * r.std_err - r.truncation_bound) << x0;
    EXPECT_LE(r.mean_utility, hi + 4 * r.std_err + r.truncation_bound) << x0;
    EXPECT_EQ(r.truncated_fraction, 0.0);
  }
}

TEST(Simulate, RuinCertaintyBlockBound) {
  auto cfg = exp_instance();
  ExpSolution sol = solve_exp(cfg);
  int barrier = 0;
  for (int n = 0; n < sol.policy.depth(); ++n) barrier = std::max(barrier, sol.policy.xi(n));
  SimulationOptions opt;
  opt.x0 = 10;
  opt.n_paths = 20000;
  opt.max_steps = 10000;
  RuinCheck rc = ruin_certainty_check(cfg, exp_policy_fn(sol.policy), barrier, opt);
  EXPECT_TRUE(rc.asserted);
  EXPECT_TRUE(rc.pass);
  EXPECT_EQ(rc.fraction, 1.0);
  EXPECT_NEAR(ruin_block_bound(0.5, 1.0, 10), 1.0 - std::pow(0.75, 5), 1e-15);
  EXPECT_EQ(ruin_block_bound(1.0, 0.0, 3), 1.0);
}

TEST(Simulate, PowerPolicyRuns) {
  auto cfg = fixtures::power_config(validate_distribution({{-1, 0.5}, {1, 0.5}}), 0.5, 0.5, 4, 6, 256);
  PowerSolution sol = solve_power(cfg);
  SimulationOptions opt;
  opt.x0 = 3;
  opt.n_paths = 200000;
  opt.seed = 3;
  SimulationResult r = simulate_paths(cfg, power_policy_fn(sol), opt);
  double pad = 0.0;
  for (double p : sol.pad)
    if (std::isfinite(p)) pad = std::max(pad, p);
  EXPECT_GE(r.mean_utility, sol.j_hat_lo(3) - pad - 4 * r.std_err - 1e-3);
  EXPECT_LE(r.mean_utility, sol.j_hat_hi(3) + 4 * r.std_err);
}

TEST(Simulate, IllegalPolicyIsReported) {
  auto cfg = exp_instance();
  SimulationOptions opt;
  opt.n_paths = 10;
  PolicyFn bad = [](int, int x, double) { return x + 1; };
  try {
    simulate_paths(cfg, bad, opt);
    FAIL() << "expected PolicyUndefined";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PolicyUndefined);
  }
  opt.n_paths = 0;
  EXPECT_THROW(simulate_paths(cfg, pay_all_fn(), opt), Error);
}
