#include "riskdiv/howard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace riskdiv {

namespace {

void check_admissible(const ExpPolicy& f, double s_star, int depth, int x_max) {
  if (f.depth() != depth || f.x_max() != x_max)
    throw Error(ErrorCode::ValidationError, "decision rule shape does not match the problem");
  for (int n = 0; n < depth; ++n) {
    for (int x = 0; x <= x_max; ++x) {
      int a = f.action(n, x);
      if (a < 0 || a > x) {
        std::ostringstream os;
        os << "action " << a << " outside A(" << x << ") at n=" << n;
        throw Error(ErrorCode::IllegalAction, os.str());
      }
      if (x > s_star && a < x - s_star) {
        std::ostringstream os;
        os << "rule keeps " << x - a << " > s* = " << s_star << " at n=" << n << " x=" << x;
        throw Error(ErrorCode::InadmissiblePolicy, os.str());
      }
    }
  }
}

}  // namespace

ExpPolicy pay_all_rule(int depth, int x_max) {
  ExpPolicy f(depth, x_max);
  for (int n = 0; n < depth; ++n)
    for (int x = 0; x <= x_max; ++x) f.at(n, x) = x;
  return f;
}

ExpValueTable policy_value_exp(const ProblemConfig& cfg, const ExpSolution& setup, const ExpPolicy& f) {
  const int N = setup.schedule.depth();
  const int X = cfg.x_max;
  check_admissible(f, setup.s_star, N, X);
  ExpValueTable jf(N, X);
  const double thN = setup.schedule.theta(N);
  const Bracket& bl = setup.h_low[static_cast<size_t>(N)];
  const Bracket& bh = setup.h_high[static_cast<size_t>(N)];
  for (int x = 0; x <= X; ++x) {
    jf.lo(N, x) = std::exp(thN * x + bl.log_lo);
    jf.hi(N, x) = std::min(1.0, std::exp(thN * x + bh.log_hi));
  }
  std::vector<double> g_lo(static_cast<size_t>(X) + 1), g_hi(static_cast<size_t>(X) + 1);
  for (int n = N - 1; n >= 0; --n) {
    double th = setup.schedule.theta(n);
    exp_continuation(cfg.dist, X, jf.lo_row(n + 1), setup.schedule.theta(n + 1), g_lo);
    exp_continuation(cfg.dist, X, jf.hi_row(n + 1), setup.schedule.theta(n + 1), g_hi);
    for (int x = 0; x <= X; ++x) {
      int a = f.action(n, x);
      double scale = std::exp(th * a);
      jf.lo(n, x) = scale * g_lo[static_cast<size_t>(x - a)];
      jf.hi(n, x) = scale * g_hi[static_cast<size_t>(x - a)];
    }
  }
  return jf;
}

ExpPolicy improve(const ProblemConfig& cfg, const ExpSolution& setup, const ExpValueTable& jf) {
  const int N = setup.schedule.depth();
  const int X = cfg.x_max;
  ExpPolicy h(N, X);
  std::vector<double> g_lo(static_cast<size_t>(X) + 1), g_hi(static_cast<size_t>(X) + 1);
  std::vector<double> out_lo(g_lo.size()), out_hi(g_lo.size());
  for (int n = 0; n < N; ++n) {
    double th_next = setup.schedule.theta(n + 1);
    exp_continuation(cfg.dist, X, jf.lo_row(n + 1), th_next, g_lo);
    exp_continuation(cfg.dist, X, jf.hi_row(n + 1), th_next, g_hi);
    exp_backup_row(setup.schedule.theta(n), g_lo, g_hi, out_lo, out_hi, h.column(n));
  }
  for (int n = 0; n < N; ++n) {
    for (int x = 0; x <= X; ++x) {
      int a = h.action(n, x);
      if (h.action(n, x - a) != 0) {
        std::ostringstream os;
        os << "improved rule pays again after paying at n=" << n << " x=" << x;
        throw Error(ErrorCode::InvariantViolation, os.str());
      }
      if (x > setup.s_star && a < x - setup.s_star) {
        std::ostringstream os;
        os << "improved rule keeps more than s* at n=" << n << " x=" << x;
        throw Error(ErrorCode::InvariantViolation, os.str());
      }
    }
  }
  return h;
}

HowardResult howard_solve(const ProblemConfig& cfg, const ExpPolicy* f0, const HowardOptions& opt) {
  ExpSolution setup = exp_tail_setup(cfg);
  const int N = setup.schedule.depth();
  const int X = cfg.x_max;
  ExpPolicy f = f0 ? *f0 : pay_all_rule(N, X);

  HowardResult res;
  ExpValueTable jf = policy_value_exp(cfg, setup, f);
  for (int it = 1;; ++it) {
    if (opt.keep_history) res.history.push_back({it - 1, f, jf});
    ExpPolicy h = improve(cfg, setup, jf);
    res.iterations = it;
    if (h == f) {
      res.final_gap = 0.0;
      break;
    }
    ExpValueTable jh = policy_value_exp(cfg, setup, h);
    double gap = 0.0;
    for (int n = 0; n <= N; ++n) {
      for (int x = 0; x <= X; ++x) {
        double lo_new = jh.lo(n, x), lo_old = jf.lo(n, x);
        double hi_new = jh.hi(n, x), hi_old = jf.hi(n, x);
        gap = std::max(gap, std::fabs(lo_new - lo_old));
        bool lo_up = lo_new > lo_old + 1e-12 * lo_old;
        bool hi_up = hi_new > hi_old + jf.width(n, x) + jh.width(n, x) + 1e-12 * hi_old;
        if (lo_up || hi_up) {
          std::ostringstream os;
          os << "policy value increased at iteration " << it << " n=" << n << " x=" << x;
          throw Error(ErrorCode::InvariantViolation, os.str());
        }
      }
    }
    res.final_gap = gap;
    f = std::move(h);
    jf = std::move(jh);
    if (it >= opt.max_iter) {
      std::ostringstream os;
      os << "no fixed point after " << it << " iterations, last gap " << gap;
      throw Error(ErrorCode::MaxIterations, os.str());
    }
  }
  res.values = std::move(jf);
  res.policy = std::move(f);
  return res;
}

}  // namespace riskdiv
