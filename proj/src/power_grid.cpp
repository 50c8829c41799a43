#include <algorithm>
#include <cmath>

#include "riskdiv/power_solver.hpp"

namespace riskdiv {

int SGrid::find_node(double s) const {
  int j = floor_index(s);
  if (j < 0) return -1;
  return std::fabs(points[static_cast<size_t>(j)] - s) <= snap_tolerance(s) ? j : -1;
}

int SGrid::floor_index(double s) const {
  auto it = std::upper_bound(points.begin(), points.end(), s + snap_tolerance(s));
  return static_cast<int>(it - points.begin()) - 1;
}

namespace {

// (A+1)^depth, or -1 once it passes the cap.
long lattice_count(int A, int depth) {
  long count = 1;
  for (int m = 0; m < depth; ++m) {
    count *= (A + 1);
    if (count > kMaxLatticePoints) return -1;
  }
  return count;
}

std::vector<double> dedupe_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  out.reserve(v.size());
  for (double s : v)
    if (out.empty() || s - out.back() > snap_tolerance(s)) out.push_back(s);
  return out;
}

}  // namespace

SGrid make_s_grid(const ProblemConfig& cfg, int depth, double base) {
  SGrid g;
  g.base = base;
  const int A = cfg.x_max + std::max(0, cfg.dist.support_max());
  g.span = A / (1.0 - cfg.beta);
  const int M = cfg.s_grid_points;
  std::vector<double> pts;
  pts.reserve(static_cast<size_t>(M));
  for (int j = 0; j < M; ++j) pts.push_back(j == M - 1 ? base + g.span : base + g.span * j / (M - 1));
  g.uniform_points = M;

  if (lattice_count(A, depth) > 0) {
    // Every discounted payout sum reachable from s = base within the horizon.
    std::vector<double> sums{0.0};
    double bm = 1.0;
    for (int m = 0; m < depth; ++m) {
      std::vector<double> next;
      next.reserve(sums.size() * static_cast<size_t>(A + 1));
      for (double s : sums)
        for (int a = 0; a <= A; ++a) next.push_back(s + bm * a);
      sums = dedupe_sorted(std::move(next));
      bm *= cfg.beta;
    }
    for (double s : sums) pts.push_back(base + s);
    g.lattice_points = static_cast<int>(sums.size());
  }
  g.points = dedupe_sorted(std::move(pts));
  return g;
}

void locate_shifted(const SGrid& grid, double shift, ShiftQuery& out) {
  const int M = grid.size();
  const std::vector<double>& s = grid.points;
  out.idx.assign(static_cast<size_t>(M), 0);
  out.w.assign(static_cast<size_t>(M), 0.0);
  out.in_range = M;
  int p = 0;
  for (int j = 0; j < M; ++j) {
    const double t = s[static_cast<size_t>(j)] + shift;
    const double tol = snap_tolerance(t);
    while (p + 1 < M && s[static_cast<size_t>(p) + 1] <= t + tol) ++p;
    if (p == M - 1) {
      if (t - s[static_cast<size_t>(M) - 1] <= tol) {
        out.idx[static_cast<size_t>(j)] = M - 2;
        out.w[static_cast<size_t>(j)] = 1.0;
        continue;
      }
      out.in_range = j;
      break;
    }
    out.idx[static_cast<size_t>(j)] = p;
    if (t - s[static_cast<size_t>(p)] <= tol) {
      out.w[static_cast<size_t>(j)] = 0.0;
    } else {
      out.w[static_cast<size_t>(j)] =
          (t - s[static_cast<size_t>(p)]) / (s[static_cast<size_t>(p) + 1] - s[static_cast<size_t>(p)]);
    }
  }
}

}  // namespace riskdiv
