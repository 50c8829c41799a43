#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskdiv/model.hpp"

namespace riskdiv {

// Two-sided enclosure of a positive quantity, with its logarithm kept
// separately so ratios of nearly equal brackets stay accurate.
struct Bracket {
  double lo = 1.0;
  double hi = 1.0;
  double log_lo = 0.0;
  double log_hi = 0.0;
  double width() const { return hi - lo; }
};

struct ThetaSchedule {
  double gamma = -1.0;
  double beta = 0.9;
  std::vector<double> thetas;  // gamma * beta^n, n = 0..depth

  static ThetaSchedule make(double gamma, double beta, int depth);
  int depth() const { return static_cast<int>(thetas.size()) - 1; }
  double theta(int n) const { return thetas[static_cast<size_t>(n)]; }
};

// sum_k q_k exp(t max(k, 0)), t <= 0.
double mgf_plus(const IncomeDistribution& dist, double t);

// Enclosure of prod_{k>=1} mgf_plus(theta beta^k), the lower tail factor.
Bracket h_lower(const IncomeDistribution& dist, double beta, double theta, double tail_eps);
// Enclosure of the value of always paying out everything, the upper tail factor.
Bracket h_upper(const IncomeDistribution& dist, double beta, double theta, double tail_eps);
// Upper end of (ln h_upper - ln h_lower) / (theta (beta - 1)); bounds the barrier.
double s_bound(const IncomeDistribution& dist, double beta, double theta, double tail_eps);

// Bracketed J(n, x) over x = -1..x_max. The x = -1 entry stands for every
// ruined state and is fixed to 1.
class ExpValueTable {
 public:
  ExpValueTable() = default;
  ExpValueTable(int depth, int x_max);

  int depth() const { return depth_; }
  int x_max() const { return x_max_; }
  double lo(int n, int x) const { return lo_[index(n, x)]; }
  double hi(int n, int x) const { return hi_[index(n, x)]; }
  double& lo(int n, int x) { return lo_[index(n, x)]; }
  double& hi(int n, int x) { return hi_[index(n, x)]; }
  // Rows include the ruined entry first: span[0] is x = -1.
  std::span<const double> lo_row(int n) const { return {lo_.data() + index(n, -1), stride()}; }
  std::span<const double> hi_row(int n) const { return {hi_.data() + index(n, -1), stride()}; }
  std::span<double> lo_row(int n) { return {lo_.data() + index(n, -1), stride()}; }
  std::span<double> hi_row(int n) { return {hi_.data() + index(n, -1), stride()}; }
  double width(int n, int x) const { return hi(n, x) - lo(n, x); }

 private:
  size_t stride() const { return static_cast<size_t>(x_max_) + 2; }
  size_t index(int n, int x) const {
    return static_cast<size_t>(n) * stride() + static_cast<size_t>((x < -1 ? -1 : x) + 1);
  }
  int depth_ = 0;
  int x_max_ = 0;
  std::vector<double> lo_, hi_;
};

// Decision rule per depth n = 0..depth-1 over x = 0..x_max. Above x_max the
// rule pays down to x_max first: f(x) = x - x_max + f(x_max).
class ExpPolicy {
 public:
  ExpPolicy() = default;
  ExpPolicy(int depth, int x_max);

  int depth() const { return depth_; }
  int x_max() const { return x_max_; }
  std::int32_t action(int n, int x) const;
  std::int32_t& at(int n, int x) { return actions_[index(n, x)]; }
  std::span<const std::int32_t> column(int n) const {
    return {actions_.data() + index(n, 0), static_cast<size_t>(x_max_) + 1};
  }
  std::span<std::int32_t> column(int n) {
    return {actions_.data() + index(n, 0), static_cast<size_t>(x_max_) + 1};
  }
  // Largest surplus with action 0 at depth n.
  int xi(int n) const;

  bool operator==(const ExpPolicy& other) const = default;

 private:
  size_t index(int n, int x) const {
    return static_cast<size_t>(n) * (static_cast<size_t>(x_max_) + 1) + static_cast<size_t>(x);
  }
  int depth_ = 0;
  int x_max_ = 0;
  std::vector<std::int32_t> actions_;
};

struct ExpSolveOptions {
  // Fail with DepthTooSmall when the depth-0 bracket is wider than this (0 disables).
  double max_width = 0.0;
};

struct ExpSolution {
  ThetaSchedule schedule;
  ExpValueTable values;
  ExpPolicy policy;
  std::vector<Bracket> h_low;   // per depth 0..N
  std::vector<Bracket> h_high;  // per depth 0..N
  std::vector<double> s_theta;  // per depth 0..N
  double s_star = 0.0;
  double max_width0 = 0.0;
};

// Smallest depth whose tail bracket is at most tail_eps wide.
int auto_exp_depth(const IncomeDistribution& dist, double gamma, double beta, double tail_eps);

// Tail brackets, s(theta) and s* for a schedule. Fills everything in ExpSolution
// except values and policy.
ExpSolution exp_tail_setup(const ProblemConfig& cfg);

// G(y) = sum_k q_k J_next(y + k) for y = 0..x_max in ascending k. `next` covers
// x = -1..x_max; states above x_max use exp(theta_next (x' - x_max)) J_next(x_max).
void exp_continuation(const IncomeDistribution& dist, int x_max, std::span<const double> next,
                      double theta_next, std::span<double> g);

struct ExpBackup {
  double lo = 1.0;
  double hi = 1.0;
  int action = 0;
};

// Single-state Bellman step at depth theta from the next-depth rows (x = -1..x_max).
ExpBackup bellman_backup_exp(const ProblemConfig& cfg, std::span<const double> next_lo,
                             std::span<const double> next_hi, double theta, int x);

// Row version used by the solver: all x at once, bit-identical to the single-state step.
void exp_backup_row(double theta, std::span<const double> g_lo, std::span<const double> g_hi,
                    std::span<double> out_lo, std::span<double> out_hi, std::span<std::int32_t> action);

// Relative tie tolerance for the largest minimiser / maximiser.
inline constexpr double kTieTolerance = 1e-12;

ExpSolution solve_exp(const ProblemConfig& cfg, const ExpSolveOptions& opt = {});

struct InvariantReport {
  long checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  void fail(std::string msg) {
    if (violations.size() < 50) violations.push_back(std::move(msg));
    else if (violations.size() == 50) violations.push_back("...");
  }
};

// Bracket sandwich, tail-factor bounds, multiplicative decrease in x, pay-down,
// barrier and band-shift properties at every entry.
InvariantReport verify_exp_solution(const ExpSolution& sol);

// Cut points of a band decision rule. Zero on [0, c[0]] and on [d[k], c[k]],
// pay down to c[k] on (c[k], d[k+1]) and above c.back().
struct BandFunction {
  std::vector<int> c;
  std::vector<int> d;
  int evaluate(int x) const;
  // c0;d1;c1;...;dn;cn
  std::string cuts_string() const;
};

BandFunction extract_band(std::span<const std::int32_t> column);
std::vector<BandFunction> extract_bands(const ExpPolicy& policy);

struct NeutralSolution {
  std::vector<double> value;          // x = 0..x_max
  std::vector<std::int32_t> action;   // x = 0..x_max
  int iterations = 0;
  double residual = 0.0;
  double barrier_bound = 0.0;
};

// Expected discounted dividends. Needs x_max >= beta E Z+ / (1 - beta)^2.
NeutralSolution solve_neutral(const ProblemConfig& cfg, double tol = 1e-13, int max_iter = 100000);

}  // namespace riskdiv
