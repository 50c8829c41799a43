#pragma once

#include <functional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "riskdiv/exp_solver.hpp"
#include "riskdiv/model.hpp"

namespace riskdiv::oracle {

using Rational = boost::multiprecision::cpp_rational;
using Real = long double;

enum class Direction { Minimize, Maximize };

// One realised history: x_0, then (a_t, z_{t+1}) pairs. The accumulated
// discounted dividends are the exact polynomial sum_t a_t beta^t over this
// integer record, evaluated in extended precision only where needed.
struct History {
  int x0 = 0;
  std::vector<int> actions;
  std::vector<int> incomes;
  int depth() const { return static_cast<int>(actions.size()); }
};

// A finite-horizon problem on the full history tree. Nodes at the horizon are
// scored with `leaf(x, s)`; ruined nodes with `ruin(s)`, where s is the
// accumulated discounted dividend sum including s0.
struct TreeProblem {
  IncomeDistribution dist;
  double beta = 0.9;
  int horizon = 0;
  Direction direction = Direction::Maximize;
  Real s0 = 0.0L;
  std::function<Real(Real s)> ruin;
  std::function<Real(int x, Real s)> leaf;
};

enum class TailEnd { Lower, Upper };

// Exponential criterion E exp(gamma S): leaves at the horizon use one end of the
// closed-form tail bracket at theta_H. `setup` comes from exp_tail_setup.
TreeProblem exp_problem(const ProblemConfig& cfg, const ExpSolution& setup, TailEnd end);
// Pure finite-horizon exponential criterion: nothing is paid after the horizon.
TreeProblem exp_problem_finite(const ProblemConfig& cfg, int horizon);
// Power or log utility of y0 + S: leaves use the closed-form envelope at the horizon.
TreeProblem power_problem(const ProblemConfig& cfg, int horizon, TailEnd end);

struct OracleOptions {
  long max_nodes = 10'000'000;
  // Depth limit of the JSON dump; -1 disables it.
  int dump_depth = -1;
};

struct OracleResult {
  Real value = 0.0L;
  int action = 0;  // optimal first action (largest optimiser)
  long nodes = 0;
  nlohmann::json tree;
};

// Number of tree nodes exact_optimal would visit.
long count_nodes(const TreeProblem& p, int x0, long cap = 10'000'000);

// Backward induction over every history. Throws TooLarge past max_nodes.
OracleResult exact_optimal(const TreeProblem& p, int x0, const OracleOptions& opt = {});

// Action for a history; may throw UndefinedAction or return an action outside A(x).
using HistoryPolicy = std::function<int(const History&, int x)>;

Real exact_policy_value(const TreeProblem& p, const HistoryPolicy& policy, int x0, const OracleOptions& opt = {});

// Probabilities renormalised exactly.
std::vector<Rational> exact_probabilities(const IncomeDistribution& dist);
// Sum over all income paths of length h of their exact probabilities.
Rational path_probability_sum(const IncomeDistribution& dist, int h);

}  // namespace riskdiv::oracle
