#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "riskdiv/exp_solver.hpp"
#include "riskdiv/model.hpp"

namespace riskdiv {

// Accumulated discounted dividends s = beta^d y. Uniform nodes on
// [base, base + span] plus, when the count is small enough, every reachable
// sum base + sum_{m<N} beta^m a_m with 0 <= a_m <= x_max + support_max.
struct SGrid {
  double base = 0.0;
  double span = 0.0;
  std::vector<double> points;
  int uniform_points = 0;
  int lattice_points = 0;

  int size() const { return static_cast<int>(points.size()); }
  double operator[](int j) const { return points[static_cast<size_t>(j)]; }
  // Node index within snapping tolerance of s, or -1.
  int find_node(double s) const;
  // Largest j with points[j] <= s (after snapping); -1 below the grid.
  int floor_index(double s) const;
};

inline double snap_tolerance(double s) { return 1e-12 * std::max(1.0, std::fabs(s)); }

// Largest lattice size still added to the grid.
inline constexpr long kMaxLatticePoints = 100000;

SGrid make_s_grid(const ProblemConfig& cfg, int depth, double base);

// Cell index and weight for base-grid queries s_j + shift, j = 0..M-1. Entries
// j < in_range lie inside the grid; idx <= M-2 and w in [0,1], with w = 0 or
// w = 1 meaning the query sits on a node.
struct ShiftQuery {
  std::vector<std::int32_t> idx;
  std::vector<double> w;
  int in_range = 0;
};
void locate_shifted(const SGrid& grid, double shift, ShiftQuery& out);

class PowerValueTable {
 public:
  PowerValueTable() = default;
  PowerValueTable(int depth, int x_max, int m);

  int depth() const { return depth_; }
  int x_max() const { return x_max_; }
  int grid_size() const { return m_; }
  double lo(int d, int x, int j) const { return lo_[index(d, x, j)]; }
  double hi(int d, int x, int j) const { return hi_[index(d, x, j)]; }
  // True when the entry was computed without any interpolation.
  bool exact(int d, int x, int j) const { return exact_[index(d, x, j)] != 0; }
  double* lo_row(int d, int x) { return lo_.data() + index(d, x, 0); }
  double* hi_row(int d, int x) { return hi_.data() + index(d, x, 0); }
  std::uint8_t* exact_row(int d, int x) { return exact_.data() + index(d, x, 0); }
  const double* lo_row(int d, int x) const { return lo_.data() + index(d, x, 0); }
  const double* hi_row(int d, int x) const { return hi_.data() + index(d, x, 0); }
  const std::uint8_t* exact_row(int d, int x) const { return exact_.data() + index(d, x, 0); }

 private:
  size_t index(int d, int x, int j) const {
    return (static_cast<size_t>(d) * (static_cast<size_t>(x_max_) + 2) + static_cast<size_t>(x + 1)) *
               static_cast<size_t>(m_) +
           static_cast<size_t>(j);
  }
  int depth_ = 0, x_max_ = 0, m_ = 0;
  std::vector<double> lo_, hi_;
  std::vector<std::uint8_t> exact_;
};

class PowerPolicy {
 public:
  PowerPolicy() = default;
  PowerPolicy(int depth, int x_max, int m);

  int depth() const { return depth_; }
  int x_max() const { return x_max_; }
  int grid_size() const { return m_; }
  std::int32_t action(int d, int x, int j) const { return a_[index(d, x, j)]; }
  std::int32_t* row(int d, int x) { return a_.data() + index(d, x, 0); }
  // Largest surplus with action 0 at (d, j).
  int xi(int d, int j) const;

 private:
  size_t index(int d, int x, int j) const {
    return (static_cast<size_t>(d) * (static_cast<size_t>(x_max_) + 1) + static_cast<size_t>(x)) *
               static_cast<size_t>(m_) +
           static_cast<size_t>(j);
  }
  int depth_ = 0, x_max_ = 0, m_ = 0;
  std::vector<std::int32_t> a_;
};

struct PowerSolveOptions {
  // Fail with DepthTooSmall when a depth-0 bracket at s = base is wider than this (0 disables).
  double max_width = 0.0;
};

struct PowerSolution {
  Utility utility = Utility::Power;
  double gamma = 0.5;
  double beta = 0.9;
  IncomeDistribution dist;
  int x_max = 0;
  int depth = 0;
  double base = 0.0;        // y0
  double reserve = 0.0;     // beta E Z+ / (1 - beta)
  double xi_star = 0.0;     // beta E Z+ / (1 - beta)^2
  std::vector<double> beta_pow;  // beta^d, d = 0..depth
  SGrid grid;
  std::vector<double> pad;  // per cell j: interpolation allowance on the upper end
  PowerValueTable values;
  PowerPolicy policy;
  double max_width0 = 0.0;

  double u(double w) const;
  // Closed-form envelopes of W_d(x, s); x < 0 gives u(s) for both.
  double lower_envelope(int d, int x, double s) const;
  double upper_envelope(int d, int x, double s) const;
  // Depth-0 bracket at s = base.
  double j_hat_lo(int x) const { return values.lo(0, x, 0); }
  double j_hat_hi(int x) const { return values.hi(0, x, 0); }
  // Action at an arbitrary state: pays any excess above x_max first, uses the
  // nearest lower node in s, and maps depths beyond the table onto the last row
  // by rescaling s to the same y.
  int action_at(int d, int x, double s) const;
};

double xi_star_bound(const ProblemConfig& cfg);

struct PowerBackup {
  double lo = 0.0;
  double hi = 0.0;
  int action = 0;
  bool exact = true;
};

// Single-state reference for one Bellman step at (d, x, node j), reading row d+1
// of sol.values. Bit-identical to what the solver stores.
PowerBackup t_backup(const PowerSolution& sol, int d, int x, int j);

PowerSolution solve_power(const ProblemConfig& cfg, const PowerSolveOptions& opt = {});
PowerSolution solve_log(const ProblemConfig& cfg, const PowerSolveOptions& opt = {});

int auto_power_depth(const ProblemConfig& cfg);

struct BarrierReport {
  int depth = 0;
  int grid_size = 0;
  std::vector<int> xi;  // (d, j) row-major
  int max_xi = 0;
  long shift_pairs_checked = 0;
  InvariantReport report;
  int at(int d, int j) const { return xi[static_cast<size_t>(d) * static_cast<size_t>(grid_size) + static_cast<size_t>(j)]; }
};

// Barrier per (d, node) and the band-shift property on exact node pairs (s, s - beta^d).
// Throws BarrierViolation when either fails.
BarrierReport barrier_diagnostics(const PowerSolution& sol);

// Bracket order, monotonicity in s, the closed-form envelope at every entry, and on
// exact entries the shift inequality and the pay-down property.
InvariantReport verify_power_solution(const PowerSolution& sol);

}  // namespace riskdiv
