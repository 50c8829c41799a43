#include "riskdiv/exp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskdiv/parallel.hpp"
#include "riskdiv/simd/kernels.hpp"

namespace riskdiv {

ExpValueTable::ExpValueTable(int depth, int x_max)
    : depth_(depth),
      x_max_(x_max),
      lo_((static_cast<size_t>(depth) + 1) * (static_cast<size_t>(x_max) + 2), 1.0),
      hi_((static_cast<size_t>(depth) + 1) * (static_cast<size_t>(x_max) + 2), 1.0) {}

ExpPolicy::ExpPolicy(int depth, int x_max)
    : depth_(depth), x_max_(x_max), actions_(static_cast<size_t>(depth) * (static_cast<size_t>(x_max) + 1), 0) {}

std::int32_t ExpPolicy::action(int n, int x) const {
  if (x < 0) return 0;
  if (x > x_max_) return x - x_max_ + actions_[index(n, x_max_)];
  return actions_[index(n, x)];
}

int ExpPolicy::xi(int n) const {
  for (int x = x_max_; x >= 0; --x)
    if (actions_[index(n, x)] == 0) return x;
  return 0;
}

void exp_continuation(const IncomeDistribution& dist, int x_max, std::span<const double> next,
                      double theta_next, std::span<double> g) {
  // next[0] is the ruined entry, next[x + 1] is surplus x.
  std::fill(g.begin(), g.end(), 0.0);
  const double top = next[static_cast<size_t>(x_max) + 1];
  for (int k = dist.support_min(); k <= dist.support_max(); ++k) {
    const double q = dist.prob(k);
    if (q == 0.0) continue;
    // y + k < 0: ruined.
    int y_ruin_end = std::min(x_max + 1, std::max(0, -k));
    for (int y = 0; y < y_ruin_end; ++y) g[static_cast<size_t>(y)] = g[static_cast<size_t>(y)] + q * next[0];
    // 0 <= y + k <= x_max: table lookup.
    int y0 = y_ruin_end;
    int y1 = std::min(x_max, x_max - k);
    if (y1 >= y0)
      simd::axpy(g.data() + y0, next.data() + 1 + y0 + k, q, static_cast<size_t>(y1 - y0 + 1));
    // y + k > x_max: pay the excess immediately.
    for (int y = std::max(y0, y1 + 1); y <= x_max; ++y) {
      double ext = std::exp(theta_next * (y + k - x_max)) * top;
      g[static_cast<size_t>(y)] = g[static_cast<size_t>(y)] + q * ext;
    }
  }
}

ExpBackup bellman_backup_exp(const ProblemConfig& cfg, std::span<const double> next_lo,
                             std::span<const double> next_hi, double theta, int x) {
  if (x < 0) return {1.0, 1.0, 0};
  if (x > cfg.x_max) throw Error(ErrorCode::ValidationError, "backup state above x_max");
  const double theta_next = theta * cfg.beta;
  const double top_lo = next_lo[static_cast<size_t>(cfg.x_max) + 1];
  const double top_hi = next_hi[static_cast<size_t>(cfg.x_max) + 1];
  auto g_at = [&](int y, std::span<const double> next, double top) {
    double acc = 0.0;
    for (int k = cfg.dist.support_min(); k <= cfg.dist.support_max(); ++k) {
      double q = cfg.dist.prob(k);
      if (q == 0.0) continue;
      int t = y + k;
      double v;
      if (t < 0) v = next[0];
      else if (t <= cfg.x_max) v = next[static_cast<size_t>(t) + 1];
      else v = std::exp(theta_next * (t - cfg.x_max)) * top;
      acc = acc + q * v;
    }
    return acc;
  };
  ExpBackup out;
  out.lo = std::numeric_limits<double>::infinity();
  out.hi = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= x; ++a) {
    double scale = std::exp(theta * a);
    double c_lo = scale * g_at(x - a, next_lo, top_lo);
    double c_hi = scale * g_at(x - a, next_hi, top_hi);
    if (a == 0 || c_lo <= out.lo + kTieTolerance * out.lo) out.action = a;
    out.lo = c_lo < out.lo ? c_lo : out.lo;
    out.hi = c_hi < out.hi ? c_hi : out.hi;
  }
  return out;
}

void exp_backup_row(double theta, std::span<const double> g_lo, std::span<const double> g_hi,
                    std::span<double> out_lo, std::span<double> out_hi, std::span<std::int32_t> action) {
  const int nx = static_cast<int>(g_lo.size());
  // a = 0 seeds the running minimum; larger actions follow in ascending order so
  // the running update keeps the largest near-minimiser.
  std::copy(g_lo.begin(), g_lo.end(), out_lo.begin());
  std::copy(g_hi.begin(), g_hi.end(), out_hi.begin());
  std::fill(action.begin(), action.end(), 0);
  constexpr int kChunk = 512;
  const int chunks = (nx + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (chunks > 1)
  for (int c = 0; c < chunks; ++c) {
    int x0 = c * kChunk;
    int x1 = std::min(nx, x0 + kChunk);
    for (int a = 1; a < x1; ++a) {
      double scale = std::exp(theta * a);
      int lo = std::max(a, x0);
      size_t len = static_cast<size_t>(x1 - lo);
      simd::scaled_argmin_update(out_lo.data() + lo, action.data() + lo, g_lo.data() + (lo - a), scale, a,
                                 kTieTolerance, len);
      simd::scaled_min_update(out_hi.data() + lo, g_hi.data() + (lo - a), scale, len);
    }
  }
}

ExpSolution solve_exp(const ProblemConfig& cfg, const ExpSolveOptions& opt) {
  ExpSolution sol = exp_tail_setup(cfg);
  const int N = sol.schedule.depth();
  const int X = cfg.x_max;
  sol.values = ExpValueTable(N, X);
  sol.policy = ExpPolicy(N, X);

  const double thN = sol.schedule.theta(N);
  const Bracket& bl = sol.h_low[static_cast<size_t>(N)];
  const Bracket& bh = sol.h_high[static_cast<size_t>(N)];
  for (int x = 0; x <= X; ++x) {
    sol.values.lo(N, x) = std::exp(thN * x + bl.log_lo);
    sol.values.hi(N, x) = std::min(1.0, std::exp(thN * x + bh.log_hi));
  }

  std::vector<double> g_lo(static_cast<size_t>(X) + 1), g_hi(static_cast<size_t>(X) + 1);
  for (int n = N - 1; n >= 0; --n) {
    double th = sol.schedule.theta(n);
    double th_next = sol.schedule.theta(n + 1);
    exp_continuation(cfg.dist, X, sol.values.lo_row(n + 1), th_next, g_lo);
    exp_continuation(cfg.dist, X, sol.values.hi_row(n + 1), th_next, g_hi);
    exp_backup_row(th, g_lo, g_hi, sol.values.lo_row(n).subspan(1), sol.values.hi_row(n).subspan(1),
                   sol.policy.column(n));
  }

  for (int x = 0; x <= X; ++x) sol.max_width0 = std::max(sol.max_width0, sol.values.width(0, x));
  if (opt.max_width > 0.0 && sol.max_width0 > opt.max_width) {
    std::ostringstream os;
    os << "depth-0 bracket width " << sol.max_width0 << " exceeds " << opt.max_width << " at depth " << N;
    throw Error(ErrorCode::DepthTooSmall, os.str());
  }
  return sol;
}

InvariantReport verify_exp_solution(const ExpSolution& sol) {
  InvariantReport rep;
  const auto& v = sol.values;
  const auto& p = sol.policy;
  const int N = v.depth();
  const int X = v.x_max();
  const double rel = 1e-12;
  auto where = [](const char* what, int n, int x) {
    std::ostringstream os;
    os << what << " at n=" << n << " x=" << x;
    return os.str();
  };
  for (int n = 0; n <= N; ++n) {
    double th = sol.schedule.theta(n);
    const Bracket& bl = sol.h_low[static_cast<size_t>(n)];
    const Bracket& bh = sol.h_high[static_cast<size_t>(n)];
    ++rep.checked;
    if (v.lo(n, -1) != 1.0 || v.hi(n, -1) != 1.0) rep.fail(where("ruined row differs from 1", n, -1));
    for (int x = 0; x <= X; ++x) {
      double lo = v.lo(n, x), hi = v.hi(n, x);
      rep.checked += 4;
      if (!(lo > 0.0 && lo <= hi && hi <= 1.0)) rep.fail(where("bracket order 0 < lo <= hi <= 1", n, x));
      double lower = std::exp(th * x) * bl.lo;
      double upper = std::exp(th * x) * bh.hi;
      if (lo < lower * (1.0 - rel)) rep.fail(where("value below the lower tail bound", n, x));
      if (hi > upper * (1.0 + rel)) rep.fail(where("value above the upper tail bound", n, x));
      if (x >= 1) {
        double slack = v.width(n, x) + v.width(n, x - 1) + rel * v.hi(n, x - 1);
        double f = std::exp(th);
        if (hi > f * v.hi(n, x - 1) + slack) rep.fail(where("hi fails multiplicative decrease", n, x));
        if (lo > f * v.lo(n, x - 1) + slack) rep.fail(where("lo fails multiplicative decrease", n, x));
      }
    }
  }
  for (int n = 0; n < N; ++n) {
    int xi = p.xi(n);
    ++rep.checked;
    if (xi > sol.s_star + 1e-9) rep.fail(where("barrier exceeds s*", n, xi));
    for (int x = 0; x <= X; ++x) {
      int a = p.action(n, x);
      rep.checked += 3;
      if (a < 0 || a > x) rep.fail(where("action outside A(x)", n, x));
      if (p.action(n, x - a) != 0) rep.fail(where("post-payment state pays again", n, x));
      if (x > xi && a != x - xi) rep.fail(where("action above barrier is not x - xi", n, x));
      if (x >= 1) {
        int a_prev = p.action(n, x - 1);
        if (a > 0 && a != a_prev + 1) rep.fail(where("band shift fails", n, x));
      }
    }
  }
  return rep;
}

}  // namespace riskdiv
