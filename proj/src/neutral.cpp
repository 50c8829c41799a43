#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskdiv/exp_solver.hpp"

namespace riskdiv {

NeutralSolution solve_neutral(const ProblemConfig& cfg, double tol, int max_iter) {
  cfg.validate();
  const int X = cfg.x_max;
  const double beta = cfg.beta;
  const double ez = cfg.dist.expected_positive();
  NeutralSolution sol;
  // Same bound as for power utility with exponent one: above it, paying one more
  // unit now beats anything the extra unit can earn later.
  sol.barrier_bound = beta * ez / ((1.0 - beta) * (1.0 - beta));
  if (X < static_cast<int>(std::ceil(sol.barrier_bound))) {
    std::ostringstream os;
    os << "x_max = " << X << " is below the barrier bound " << sol.barrier_bound;
    throw Error(ErrorCode::CapTooSmall, os.str());
  }

  // Start above the fixed point so the iterates decrease monotonically.
  std::vector<double> v(static_cast<size_t>(X) + 1), next(v.size()), g(v.size());
  for (int x = 0; x <= X; ++x) v[static_cast<size_t>(x)] = x + beta * ez / (1.0 - beta);
  sol.action.assign(v.size(), 0);

  auto value_at = [&](int t) {
    if (t < 0) return 0.0;
    if (t <= X) return v[static_cast<size_t>(t)];
    return v[static_cast<size_t>(X)] + (t - X);
  };
  for (int it = 1; it <= max_iter; ++it) {
    for (int y = 0; y <= X; ++y) {
      double acc = 0.0;
      for (int k = cfg.dist.support_min(); k <= cfg.dist.support_max(); ++k) {
        double q = cfg.dist.prob(k);
        if (q != 0.0) acc = acc + q * value_at(y + k);
      }
      g[static_cast<size_t>(y)] = acc;
    }
    double diff = 0.0;
    for (int x = 0; x <= X; ++x) {
      double best = beta * g[static_cast<size_t>(x)];
      int act = 0;
      for (int a = 1; a <= x; ++a) {
        double c = a + beta * g[static_cast<size_t>(x - a)];
        // Ties within the value-iteration accuracy go to the larger payout.
        if (c >= best - 1e-9 * std::max(1.0, std::fabs(best))) act = a;
        best = std::max(best, c);
      }
      next[static_cast<size_t>(x)] = best;
      sol.action[static_cast<size_t>(x)] = act;
      diff = std::max(diff, std::fabs(best - v[static_cast<size_t>(x)]));
    }
    v.swap(next);
    sol.iterations = it;
    sol.residual = diff;
    if (diff <= tol * std::max(1.0, v[static_cast<size_t>(X)])) break;
  }
  if (sol.residual > tol * std::max(1.0, v[static_cast<size_t>(X)]))
    throw Error(ErrorCode::MaxIterations, "risk-neutral value iteration did not converge");
  sol.value = std::move(v);
  return sol;
}

}  // namespace riskdiv
