#pragma once

#include <vector>

#include "riskdiv/exp_solver.hpp"

namespace riskdiv {

// f(n, x) = x at every depth.
ExpPolicy pay_all_rule(int depth, int x_max);

// Bracketed value of following f at depths 0..N-1 and continuing optimally
// from depth N (the same tail closure as solve_exp). `setup` comes from
// exp_tail_setup or solve_exp and supplies the schedule, tail brackets and s*.
ExpValueTable policy_value_exp(const ProblemConfig& cfg, const ExpSolution& setup, const ExpPolicy& f);

// Largest minimiser of a -> e^{theta_n a} G_f(x - a) at every depth, built from
// the lo end of J_f. Checks that the new rule never pays into a state that pays
// again and never leaves more than s* after paying.
ExpPolicy improve(const ProblemConfig& cfg, const ExpSolution& setup, const ExpValueTable& jf);

struct HowardOptions {
  int max_iter = 1000;
  bool keep_history = false;
};

struct HowardStep {
  int iteration = 0;
  ExpPolicy rule;
  ExpValueTable values;
};

struct HowardResult {
  ExpValueTable values;
  ExpPolicy policy;
  int iterations = 0;
  // Largest change of the lo values in the last iteration.
  double final_gap = 0.0;
  std::vector<HowardStep> history;
};

// Evaluate and improve until the rule stops changing. f0 defaults to pay-all.
HowardResult howard_solve(const ProblemConfig& cfg, const ExpPolicy* f0 = nullptr,
                          const HowardOptions& opt = {});

}  // namespace riskdiv
