#include "riskdiv/power_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskdiv/parallel.hpp"
#include "riskdiv/simd/kernels.hpp"

namespace riskdiv {

PowerValueTable::PowerValueTable(int depth, int x_max, int m)
    : depth_(depth), x_max_(x_max), m_(m) {
  size_t n = (static_cast<size_t>(depth) + 1) * (static_cast<size_t>(x_max) + 2) * static_cast<size_t>(m);
  lo_.assign(n, 0.0);
  hi_.assign(n, 0.0);
  exact_.assign(n, 1);
}

PowerPolicy::PowerPolicy(int depth, int x_max, int m)
    : depth_(depth), x_max_(x_max), m_(m),
      a_(static_cast<size_t>(depth) * (static_cast<size_t>(x_max) + 1) * static_cast<size_t>(m), 0) {}

int PowerPolicy::xi(int d, int j) const {
  for (int x = x_max_; x >= 0; --x)
    if (action(d, x, j) == 0) return x;
  return 0;
}

double PowerSolution::u(double w) const {
  if (utility == Utility::Logarithmic) return std::log(w);
  return std::pow(w, gamma);
}

double PowerSolution::lower_envelope(int d, int x, double s) const {
  if (x < 0) return u(s);
  return u(s + beta_pow[static_cast<size_t>(d)] * x);
}

double PowerSolution::upper_envelope(int d, int x, double s) const {
  if (x < 0) return u(s);
  return u(s + beta_pow[static_cast<size_t>(d)] * (x + reserve));
}

int PowerSolution::action_at(int d, int x, double s) const {
  if (x < 0) return 0;
  if (depth < 1) return x;
  if (d >= depth) {
    // Same y = s / beta^d on the last computed row.
    s = s * std::pow(beta, (depth - 1) - d);
    d = depth - 1;
  }
  int extra = std::max(0, x - x_max);
  double s_after = s + beta_pow[static_cast<size_t>(d)] * extra;
  int j = std::max(0, grid.floor_index(s_after));
  return extra + policy.action(d, x - extra, j);
}

double xi_star_bound(const ProblemConfig& cfg) {
  double b = cfg.beta;
  return b * cfg.dist.expected_positive() / ((1.0 - b) * (1.0 - b));
}

namespace {

// |u''| at w, used for the cell allowance on the upper end.
double curvature(const PowerSolution& sol, double w) {
  if (w <= 0.0) return std::numeric_limits<double>::infinity();
  if (sol.utility == Utility::Logarithmic) return 1.0 / (w * w);
  return sol.gamma * (1.0 - sol.gamma) * std::pow(w, sol.gamma - 2.0);
}

// Per-depth lookup data shared by all surplus levels.
struct DepthContext {
  int d = 0;
  double bd = 1.0;       // beta^d
  double bd1 = 1.0;      // beta^{d+1}
  bool tail_next = false;
  int overflow = 0;      // largest income that can push x above x_max
  std::vector<std::vector<double>> ruin;  // per a: u(s_j + beta^d a)
  std::vector<ShiftQuery> queries;         // per (a, e)

  double pay_shift(int a) const { return bd * a; }
  double shift(int a, int e) const {
    double sa = bd * a;
    return e > 0 ? sa + bd1 * e : sa;
  }
  const ShiftQuery& query(int a, int e) const {
    return queries[static_cast<size_t>(a) * static_cast<size_t>(overflow + 1) + static_cast<size_t>(e)];
  }
};

DepthContext make_context(const PowerSolution& sol, int d) {
  DepthContext c;
  c.d = d;
  c.bd = sol.beta_pow[static_cast<size_t>(d)];
  c.bd1 = sol.beta_pow[static_cast<size_t>(d) + 1];
  c.tail_next = (d + 1 == sol.depth);
  c.overflow = std::max(0, sol.dist.support_max());
  const int M = sol.grid.size();
  const int X = sol.x_max;
  c.ruin.assign(static_cast<size_t>(X) + 1, std::vector<double>(static_cast<size_t>(M)));
  for (int a = 0; a <= X; ++a)
    for (int j = 0; j < M; ++j) c.ruin[static_cast<size_t>(a)][static_cast<size_t>(j)] = sol.u(sol.grid[j] + c.pay_shift(a));
  if (!c.tail_next) {
    c.queries.resize(static_cast<size_t>(X + 1) * static_cast<size_t>(c.overflow + 1));
    for (int a = 0; a <= X; ++a)
      for (int e = 0; e <= c.overflow; ++e)
        locate_shifted(sol.grid, c.shift(a, e),
                       c.queries[static_cast<size_t>(a) * static_cast<size_t>(c.overflow + 1) + static_cast<size_t>(e)]);
  }
  return c;
}

struct Workspace {
  std::vector<double> cand_lo, cand_hi, best_lo, best_hi, lenv, uenv;
  std::vector<std::uint8_t> cand_exact, best_exact;
  std::vector<std::int32_t> action;
  explicit Workspace(int M)
      : cand_lo(static_cast<size_t>(M)), cand_hi(static_cast<size_t>(M)), best_lo(static_cast<size_t>(M)),
        best_hi(static_cast<size_t>(M)), lenv(static_cast<size_t>(M)), uenv(static_cast<size_t>(M)),
        cand_exact(static_cast<size_t>(M)), best_exact(static_cast<size_t>(M)), action(static_cast<size_t>(M)) {}
};

// Candidate value of paying a at every node of row (d, x), into ws.cand_*.
void candidate_row(const PowerSolution& sol, const DepthContext& ctx, int x, int a, Workspace& ws) {
  const int M = sol.grid.size();
  const int X = sol.x_max;
  const double c = sol.reserve;
  const double bN = sol.beta_pow[static_cast<size_t>(sol.depth)];
  std::fill(ws.cand_lo.begin(), ws.cand_lo.end(), 0.0);
  std::fill(ws.cand_hi.begin(), ws.cand_hi.end(), 0.0);
  std::fill(ws.cand_exact.begin(), ws.cand_exact.end(), 1);
  const double sa = ctx.pay_shift(a);
  for (int k = sol.dist.support_min(); k <= sol.dist.support_max(); ++k) {
    const double q = sol.dist.prob(k);
    if (q == 0.0) continue;
    const int m = x - a + k;
    if (m < 0) {
      const std::vector<double>& r = ctx.ruin[static_cast<size_t>(a)];
      simd::axpy(ws.cand_lo.data(), r.data(), q, static_cast<size_t>(M));
      simd::axpy(ws.cand_hi.data(), r.data(), q, static_cast<size_t>(M));
      continue;
    }
    if (ctx.tail_next) {
      for (int j = 0; j < M; ++j) {
        double t = sol.grid[j] + sa;
        ws.cand_lo[static_cast<size_t>(j)] = ws.cand_lo[static_cast<size_t>(j)] + q * sol.u(t + bN * m);
        ws.cand_hi[static_cast<size_t>(j)] = ws.cand_hi[static_cast<size_t>(j)] + q * sol.u(t + bN * (m + c));
      }
      continue;
    }
    const int row = std::min(m, X);
    const int e = m - row;
    const ShiftQuery& Q = ctx.query(a, e);
    const double sigma = ctx.shift(a, e);
    const int n_in = Q.in_range;
    const std::uint8_t* ex = sol.values.exact_row(ctx.d + 1, row);
    for (int j = 0; j < n_in; ++j) {
      double w = Q.w[static_cast<size_t>(j)];
      std::int32_t i = Q.idx[static_cast<size_t>(j)];
      if (w > 0.0) {
        double t = sol.grid[j] + sigma;
        ws.lenv[static_cast<size_t>(j)] = sol.u(t + ctx.bd1 * row);
        ws.uenv[static_cast<size_t>(j)] = sol.u(t + ctx.bd1 * (row + c));
      } else {
        ws.lenv[static_cast<size_t>(j)] = 0.0;
        ws.uenv[static_cast<size_t>(j)] = 0.0;
      }
      int node = w == 0.0 ? i : (w == 1.0 ? i + 1 : -1);
      if (node < 0 || !ex[node]) ws.cand_exact[static_cast<size_t>(j)] = 0;
    }
    simd::gather_lerp_accumulate(ws.cand_lo.data(), ws.cand_hi.data(), sol.values.lo_row(ctx.d + 1, row),
                                 sol.values.hi_row(ctx.d + 1, row), sol.pad.data(), Q.idx.data(), Q.w.data(),
                                 ws.lenv.data(), ws.uenv.data(), q, static_cast<size_t>(n_in));
    // Beyond the grid the closed-form envelopes stand in for the table; the lower
    // end also keeps the last node's value since W is nondecreasing in s.
    const double last_lo = sol.values.lo_row(ctx.d + 1, row)[M - 1];
    for (int j = n_in; j < M; ++j) {
      double t = sol.grid[j] + sigma;
      double le = sol.u(t + ctx.bd1 * row);
      le = last_lo > le ? last_lo : le;
      ws.cand_lo[static_cast<size_t>(j)] = ws.cand_lo[static_cast<size_t>(j)] + q * le;
      ws.cand_hi[static_cast<size_t>(j)] = ws.cand_hi[static_cast<size_t>(j)] + q * sol.u(t + ctx.bd1 * (row + c));
      ws.cand_exact[static_cast<size_t>(j)] = 0;
    }
  }
}

void backup_depth(PowerSolution& sol, int d) {
  const int M = sol.grid.size();
  const int X = sol.x_max;
  const DepthContext ctx = make_context(sol, d);
#pragma omp parallel num_threads(thread_count())
  {
    Workspace ws(M);
#pragma omp for schedule(dynamic, 1)
    for (int x = X; x >= 0; --x) {
      for (int a = 0; a <= x; ++a) {
        candidate_row(sol, ctx, x, a, ws);
        if (a == 0) {
          ws.best_lo = ws.cand_lo;
          ws.best_hi = ws.cand_hi;
          ws.best_exact = ws.cand_exact;
          std::fill(ws.action.begin(), ws.action.end(), 0);
          continue;
        }
        simd::argmax_update(ws.best_lo.data(), ws.action.data(), ws.cand_lo.data(), a, kTieTolerance,
                            static_cast<size_t>(M));
        simd::max_update(ws.best_hi.data(), ws.cand_hi.data(), static_cast<size_t>(M));
        for (int j = 0; j < M; ++j) ws.best_exact[static_cast<size_t>(j)] &= ws.cand_exact[static_cast<size_t>(j)];
      }
      std::copy(ws.best_lo.begin(), ws.best_lo.end(), sol.values.lo_row(d, x));
      std::copy(ws.best_hi.begin(), ws.best_hi.end(), sol.values.hi_row(d, x));
      std::copy(ws.best_exact.begin(), ws.best_exact.end(), sol.values.exact_row(d, x));
      std::copy(ws.action.begin(), ws.action.end(), sol.policy.row(d, x));
    }
  }
}

PowerSolution setup(const ProblemConfig& cfg, Utility expected) {
  cfg.validate();
  if (cfg.utility != expected)
    throw Error(ErrorCode::ValidationError, std::string("solver needs utility = ") + utility_name(expected));
  PowerSolution sol;
  sol.utility = cfg.utility;
  sol.gamma = cfg.gamma;
  sol.beta = cfg.beta;
  sol.dist = cfg.dist;
  sol.x_max = cfg.x_max;
  sol.base = cfg.y0;
  sol.reserve = cfg.beta * cfg.dist.expected_positive() / (1.0 - cfg.beta);
  sol.xi_star = xi_star_bound(cfg);
  if (cfg.x_max < static_cast<int>(std::ceil(sol.xi_star))) {
    std::ostringstream os;
    os << "x_max = " << cfg.x_max << " is below the barrier bound " << sol.xi_star << "; use x_max >= "
       << static_cast<int>(std::ceil(sol.xi_star));
    throw Error(ErrorCode::CapTooSmall, os.str());
  }
  sol.depth = cfg.depth > 0 ? cfg.depth : auto_power_depth(cfg);
  sol.beta_pow.resize(static_cast<size_t>(sol.depth) + 1);
  double b = 1.0;
  for (int d = 0; d <= sol.depth; ++d) {
    sol.beta_pow[static_cast<size_t>(d)] = b;
    b *= cfg.beta;
  }
  sol.grid = make_s_grid(cfg, sol.depth, sol.base);
  const int M = sol.grid.size();
  sol.pad.assign(static_cast<size_t>(M), 0.0);
  for (int j = 0; j + 1 < M; ++j) {
    double h = sol.grid[j + 1] - sol.grid[j];
    sol.pad[static_cast<size_t>(j)] = h * h / 8.0 * curvature(sol, sol.grid[j]);
  }
  return sol;
}

PowerSolution solve_generic(const ProblemConfig& cfg, Utility expected, const PowerSolveOptions& opt) {
  PowerSolution sol = setup(cfg, expected);
  const int N = sol.depth;
  const int X = sol.x_max;
  const int M = sol.grid.size();
  sol.values = PowerValueTable(N, X, M);
  sol.policy = PowerPolicy(N, X, M);
  for (int d = 0; d <= N; ++d) {
    double* lo = sol.values.lo_row(d, -1);
    double* hi = sol.values.hi_row(d, -1);
    for (int j = 0; j < M; ++j) lo[j] = hi[j] = sol.u(sol.grid[j]);
  }
  for (int x = 0; x <= X; ++x) {
    double* lo = sol.values.lo_row(N, x);
    double* hi = sol.values.hi_row(N, x);
    for (int j = 0; j < M; ++j) {
      lo[j] = sol.lower_envelope(N, x, sol.grid[j]);
      hi[j] = sol.upper_envelope(N, x, sol.grid[j]);
    }
  }
  for (int d = N - 1; d >= 0; --d) backup_depth(sol, d);

  for (int x = 0; x <= X; ++x) sol.max_width0 = std::max(sol.max_width0, sol.j_hat_hi(x) - sol.j_hat_lo(x));
  if (opt.max_width > 0.0 && sol.max_width0 > opt.max_width) {
    std::ostringstream os;
    os << "depth-0 bracket width " << sol.max_width0 << " exceeds " << opt.max_width << " at depth " << N;
    throw Error(ErrorCode::DepthTooSmall, os.str());
  }
  return sol;
}

}  // namespace

int auto_power_depth(const ProblemConfig& cfg) {
  const double c = cfg.beta * cfg.dist.expected_positive() / (1.0 - cfg.beta);
  auto u = [&](double w) { return cfg.utility == Utility::Logarithmic ? std::log(w) : std::pow(w, cfg.gamma); };
  double b = 1.0;
  for (int n = 1; n <= 5000; ++n) {
    b *= cfg.beta;
    // The tail gap is largest at x = 0 and s = y0 since u is concave.
    if (u(cfg.y0 + b * c) - u(cfg.y0) <= cfg.tail_eps) return n;
  }
  throw Error(ErrorCode::DepthTooSmall, "no depth up to 5000 reaches tail_eps; set depth explicitly");
}

PowerBackup t_backup(const PowerSolution& sol, int d, int x, int j) {
  if (d < 0 || d >= sol.depth || x < 0 || x > sol.x_max || j < 0 || j >= sol.grid.size())
    throw Error(ErrorCode::ValidationError, "t_backup state outside the table");
  const int X = sol.x_max;
  const double c = sol.reserve;
  const double bd = sol.beta_pow[static_cast<size_t>(d)];
  const double bd1 = sol.beta_pow[static_cast<size_t>(d) + 1];
  const double bN = sol.beta_pow[static_cast<size_t>(sol.depth)];
  const bool tail_next = d + 1 == sol.depth;
  const double sj = sol.grid[j];
  PowerBackup out;
  ShiftQuery Q;
  for (int a = 0; a <= x; ++a) {
    double lo = 0.0, hi = 0.0;
    bool exact = true;
    const double sa = bd * a;
    for (int k = sol.dist.support_min(); k <= sol.dist.support_max(); ++k) {
      const double q = sol.dist.prob(k);
      if (q == 0.0) continue;
      const int m = x - a + k;
      double vl, vh;
      if (m < 0) {
        vl = vh = sol.u(sj + sa);
      } else if (tail_next) {
        double t = sj + sa;
        vl = sol.u(t + bN * m);
        vh = sol.u(t + bN * (m + c));
      } else {
        const int row = std::min(m, X);
        const int e = m - row;
        const double sigma = e > 0 ? sa + bd1 * e : sa;
        const double t = sj + sigma;
        locate_shifted(sol.grid, sigma, Q);
        if (j >= Q.in_range) {
          const double last_lo = sol.values.lo(d + 1, row, sol.grid.size() - 1);
          vl = sol.u(t + bd1 * row);
          vl = last_lo > vl ? last_lo : vl;
          vh = sol.u(t + bd1 * (row + c));
          exact = false;
        } else {
          const std::int32_t i = Q.idx[static_cast<size_t>(j)];
          const double w = Q.w[static_cast<size_t>(j)];
          const double* L = sol.values.lo_row(d + 1, row);
          const double* H = sol.values.hi_row(d + 1, row);
          double u1 = 1.0 - w;
          vl = u1 * L[i] + w * L[i + 1];
          vh = u1 * H[i] + w * H[i + 1];
          if (w > 0.0) {
            double p = vh + sol.pad[static_cast<size_t>(i)];
            vh = p < H[i + 1] ? p : H[i + 1];
            double ue = sol.u(t + bd1 * (row + c));
            double le = sol.u(t + bd1 * row);
            vh = ue < vh ? ue : vh;
            vl = le > vl ? le : vl;
          }
          int node = w == 0.0 ? i : (w == 1.0 ? i + 1 : -1);
          if (node < 0 || !sol.values.exact(d + 1, row, node)) exact = false;
        }
      }
      lo = lo + q * vl;
      hi = hi + q * vh;
    }
    if (a == 0) {
      out.lo = lo;
      out.hi = hi;
      out.exact = exact;
      out.action = 0;
      continue;
    }
    if (lo >= out.lo - kTieTolerance * std::fabs(out.lo)) out.action = a;
    out.lo = lo > out.lo ? lo : out.lo;
    out.hi = hi > out.hi ? hi : out.hi;
    out.exact = out.exact && exact;
  }
  return out;
}

PowerSolution solve_power(const ProblemConfig& cfg, const PowerSolveOptions& opt) {
  return solve_generic(cfg, Utility::Power, opt);
}

PowerSolution solve_log(const ProblemConfig& cfg, const PowerSolveOptions& opt) {
  return solve_generic(cfg, Utility::Logarithmic, opt);
}

BarrierReport barrier_diagnostics(const PowerSolution& sol) {
  BarrierReport rep;
  const int N = sol.depth, X = sol.x_max, M = sol.grid.size();
  rep.depth = N;
  rep.grid_size = M;
  rep.xi.assign(static_cast<size_t>(N) * static_cast<size_t>(M), 0);
  for (int d = 0; d < N; ++d) {
    for (int j = 0; j < M; ++j) {
      int xi = sol.policy.xi(d, j);
      rep.xi[static_cast<size_t>(d) * static_cast<size_t>(M) + static_cast<size_t>(j)] = xi;
      rep.max_xi = std::max(rep.max_xi, xi);
      ++rep.report.checked;
      if (xi > sol.xi_star + 1e-9) {
        std::ostringstream os;
        os << "barrier " << xi << " exceeds " << sol.xi_star << " at d=" << d << " s=" << sol.grid[j];
        rep.report.fail(os.str());
      }
    }
    // Moving one unit from y to x: node pairs (s, s - beta^d), both exact.
    const double bd = sol.beta_pow[static_cast<size_t>(d)];
    for (int j = 0; j < M; ++j) {
      int jm = sol.grid.find_node(sol.grid[j] - bd);
      if (jm < 0) continue;
      for (int x0 = 0; x0 < X; ++x0) {
        if (!sol.values.exact(d, x0, j) || !sol.values.exact(d, x0 + 1, jm)) continue;
        ++rep.shift_pairs_checked;
        int a0 = sol.policy.action(d, x0, j);
        int a1 = sol.policy.action(d, x0 + 1, jm);
        if (a1 > 0 && a1 != a0 + 1) {
          std::ostringstream os;
          os << "shift property fails at d=" << d << " x0=" << x0 << " s=" << sol.grid[j] << ": " << a0 << " vs "
             << a1;
          rep.report.fail(os.str());
        }
      }
    }
  }
  if (!rep.report.ok()) throw Error(ErrorCode::BarrierViolation, rep.report.violations.front());
  return rep;
}

InvariantReport verify_power_solution(const PowerSolution& sol) {
  InvariantReport rep;
  const int N = sol.depth, X = sol.x_max, M = sol.grid.size();
  auto tol = [](double v) { return 1e-12 * std::max(1.0, std::fabs(v)); };
  auto where = [&](const char* what, int d, int x, int j) {
    std::ostringstream os;
    os << what << " at d=" << d << " x=" << x << " s=" << sol.grid[j];
    return os.str();
  };
  for (int d = 0; d <= N; ++d) {
    for (int x = -1; x <= X; ++x) {
      for (int j = 0; j < M; ++j) {
        double lo = sol.values.lo(d, x, j), hi = sol.values.hi(d, x, j);
        rep.checked += 4;
        if (lo > hi + tol(hi)) rep.fail(where("lo above hi", d, x, j));
        if (lo < sol.lower_envelope(d, x, sol.grid[j]) - tol(lo)) rep.fail(where("below the lower envelope", d, x, j));
        if (hi > sol.upper_envelope(d, x, sol.grid[j]) + tol(hi)) rep.fail(where("above the upper envelope", d, x, j));
        if (j > 0) {
          if (lo < sol.values.lo(d, x, j - 1) - tol(lo) || hi < sol.values.hi(d, x, j - 1) - tol(hi))
            rep.fail(where("decreasing in s", d, x, j));
        }
      }
    }
  }
  for (int d = 0; d < N; ++d) {
    const double bd = sol.beta_pow[static_cast<size_t>(d)];
    for (int x = 0; x <= X; ++x) {
      for (int j = 0; j < M; ++j) {
        if (!sol.values.exact(d, x, j)) continue;
        const double lo = sol.values.lo(d, x, j);
        for (int v = 1; v <= x; ++v) {
          int jv = sol.grid.find_node(sol.grid[j] + bd * v);
          if (jv < 0 || !sol.values.exact(d, x - v, jv)) continue;
          ++rep.checked;
          if (lo < sol.values.lo(d, x - v, jv) - tol(lo)) rep.fail(where("moving surplus into s increases value", d, x, j));
        }
        int a = sol.policy.action(d, x, j);
        int ja = sol.grid.find_node(sol.grid[j] + bd * a);
        if (ja >= 0 && sol.values.exact(d, x - a, ja)) {
          ++rep.checked;
          if (sol.policy.action(d, x - a, ja) != 0) rep.fail(where("post-payment state pays again", d, x, j));
        }
      }
    }
  }
  return rep;
}

}  // namespace riskdiv
