#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "riskdiv/exp_solver.hpp"
#include "riskdiv/model.hpp"
#include "riskdiv/power_solver.hpp"

namespace riskdiv {

// Action at epoch t, surplus x >= 0 and accumulated discounted dividends s.
using PolicyFn = std::function<int(int t, int x, double s)>;

PolicyFn exp_policy_fn(const ExpPolicy& policy);
PolicyFn power_policy_fn(const PowerSolution& sol);
PolicyFn pay_all_fn();

// Per-path stream: mt19937_64 seeded with splitmix64(seed + path * golden gamma).
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path);

struct SimulationResult {
  long n_paths = 0;
  // Sample mean and standard error of U(y0 + sum_t beta^t a_t).
  double mean_utility = 0.0;
  double std_err = 0.0;
  double ruin_fraction = 0.0;
  double mean_ruin_time = 0.0;
  double truncated_fraction = 0.0;
  // Largest discounted amount a truncated path could still have paid.
  double truncation_bound = 0.0;
  std::vector<double> discounted_sum;
  std::vector<int> ruin_time;  // max_steps when truncated
};

struct SimulationOptions {
  int x0 = 0;
  long n_paths = 10000;
  int max_steps = 10000;
  std::uint64_t seed = 0;
  bool keep_paths = false;
};

SimulationResult simulate_paths(const ProblemConfig& cfg, const PolicyFn& policy, const SimulationOptions& opt);

struct RuinCheck {
  double fraction = 0.0;
  double bound = 0.0;
  double sigma = 0.0;
  bool asserted = true;  // false when the policy is outside the precondition
  bool pass = true;
};

// Compares the ruined fraction with the block bound built from runs of
// floor(xi*) + 1 consecutive negative incomes.
RuinCheck ruin_certainty_check(const ProblemConfig& cfg, const PolicyFn& policy, double xi_star,
                               const SimulationOptions& opt);

// Block bound 1 - (1 - p_neg^{k})^{floor(max_steps / k)}, k = floor(xi*) + 1.
double ruin_block_bound(double p_neg, double xi_star, int max_steps);

// Deterministic pairwise sum.
double pairwise_sum(const double* v, std::size_t n);

}  // namespace riskdiv
