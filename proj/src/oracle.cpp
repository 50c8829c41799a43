#include "riskdiv/oracle.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace riskdiv::oracle {

std::vector<Rational> exact_probabilities(const IncomeDistribution& dist) {
  std::vector<Rational> q;
  Rational total = 0;
  for (double p : dist.probs()) {
    q.emplace_back(p);  // doubles are dyadic rationals, so this is exact
    total += q.back();
  }
  for (Rational& r : q) r /= total;
  return q;
}

Rational path_probability_sum(const IncomeDistribution& dist, int h) {
  std::vector<Rational> q = exact_probabilities(dist);
  // Enumerate every path; the product per path is accumulated exactly.
  std::vector<Rational> level{Rational(1)};
  for (int t = 0; t < h; ++t) {
    std::vector<Rational> next;
    next.reserve(level.size() * q.size());
    for (const Rational& p : level)
      for (const Rational& qk : q)
        if (qk != 0) next.push_back(p * qk);
    level = std::move(next);
  }
  Rational sum = 0;
  for (const Rational& p : level) sum += p;
  return sum;
}

TreeProblem exp_problem(const ProblemConfig& cfg, const ExpSolution& setup, TailEnd end) {
  TreeProblem p;
  p.dist = cfg.dist;
  p.beta = cfg.beta;
  p.horizon = setup.schedule.depth();
  p.direction = Direction::Minimize;
  const Real g = cfg.gamma;
  const Real th = setup.schedule.theta(p.horizon);
  const Bracket lo = setup.h_low[static_cast<size_t>(p.horizon)];
  const Bracket hi = setup.h_high[static_cast<size_t>(p.horizon)];
  p.ruin = [g](Real s) { return std::exp(g * s); };
  if (end == TailEnd::Lower) {
    p.leaf = [g, th, lo](int x, Real s) { return std::exp(g * s) * std::exp(th * x + lo.log_lo); };
  } else {
    p.leaf = [g, th, hi](int x, Real s) {
      return std::exp(g * s) * std::min<Real>(1.0L, std::exp(th * x + hi.log_hi));
    };
  }
  return p;
}

TreeProblem exp_problem_finite(const ProblemConfig& cfg, int horizon) {
  TreeProblem p;
  p.dist = cfg.dist;
  p.beta = cfg.beta;
  p.horizon = horizon;
  p.direction = Direction::Minimize;
  const Real g = cfg.gamma;
  p.ruin = [g](Real s) { return std::exp(g * s); };
  p.leaf = [g](int, Real s) { return std::exp(g * s); };
  return p;
}

TreeProblem power_problem(const ProblemConfig& cfg, int horizon, TailEnd end) {
  if (cfg.utility != Utility::Power && cfg.utility != Utility::Logarithmic)
    throw Error(ErrorCode::ValidationError, "power oracle needs power or log utility");
  if (cfg.utility == Utility::Logarithmic && !(cfg.y0 > 0.0))
    throw Error(ErrorCode::DomainError, "log utility needs y0 > 0");
  TreeProblem p;
  p.dist = cfg.dist;
  p.beta = cfg.beta;
  p.horizon = horizon;
  p.direction = Direction::Maximize;
  p.s0 = cfg.y0;
  const bool log_u = cfg.utility == Utility::Logarithmic;
  const Real g = cfg.gamma;
  auto u = [log_u, g](Real w) { return log_u ? std::log(w) : std::pow(w, g); };
  Real bH = std::pow(static_cast<Real>(cfg.beta), static_cast<Real>(horizon));
  Real c = end == TailEnd::Upper
               ? static_cast<Real>(cfg.beta) * cfg.dist.expected_positive() / (1.0L - static_cast<Real>(cfg.beta))
               : 0.0L;
  p.ruin = u;
  p.leaf = [u, bH, c](int x, Real s) { return u(s + bH * (static_cast<Real>(x) + c)); };
  return p;
}

namespace {

struct Tree {
  const TreeProblem& p;
  std::vector<int> ks;
  std::vector<Real> qs;
  std::vector<Real> bpow;
  long nodes = 0;
  long max_nodes = 0;

  explicit Tree(const TreeProblem& prob) : p(prob) {
    std::vector<Rational> q = exact_probabilities(p.dist);
    for (int k = p.dist.support_min(); k <= p.dist.support_max(); ++k) {
      const Rational& r = q[static_cast<size_t>(k - p.dist.support_min())];
      if (r == 0) continue;
      ks.push_back(k);
      qs.push_back(static_cast<Real>(r));
    }
    Real b = 1.0L;
    for (int t = 0; t <= p.horizon; ++t) {
      bpow.push_back(b);
      b *= static_cast<Real>(p.beta);
    }
  }

  void tick() {
    if (++nodes > max_nodes) {
      std::ostringstream os;
      os << "history tree exceeds " << max_nodes << " nodes";
      throw Error(ErrorCode::TooLarge, os.str());
    }
  }

  bool better(Real cand, Real best) const {
    return p.direction == Direction::Maximize ? cand >= best : cand <= best;
  }

  Real optimal(int t, int x, Real s, int* first_action, int dump_left, nlohmann::json* dump) {
    tick();
    if (x < 0) {
      Real v = p.ruin(s);
      if (dump) *dump = {{"t", t}, {"x", x}, {"s", static_cast<double>(s)}, {"value", static_cast<double>(v)}};
      return v;
    }
    if (t == p.horizon) {
      Real v = p.leaf(x, s);
      if (dump) *dump = {{"t", t}, {"x", x}, {"s", static_cast<double>(s)}, {"value", static_cast<double>(v)}};
      return v;
    }
    Real best = 0.0L;
    int best_a = -1;
    for (int a = 0; a <= x; ++a) {
      Real sa = s + static_cast<Real>(a) * bpow[static_cast<size_t>(t)];
      Real v = 0.0L;
      for (size_t i = 0; i < ks.size(); ++i)
        v += qs[i] * optimal(t + 1, x - a + ks[i], sa, nullptr, 0, nullptr);
      if (best_a < 0 || better(v, best)) {
        best = v;
        best_a = a;
      }
    }
    if (first_action) *first_action = best_a;
    if (dump) {
      *dump = {{"t", t}, {"x", x}, {"s", static_cast<double>(s)}, {"value", static_cast<double>(best)},
               {"action", best_a}};
      if (dump_left > 0) {
        nlohmann::json kids = nlohmann::json::array();
        Real sa = s + static_cast<Real>(best_a) * bpow[static_cast<size_t>(t)];
        for (size_t i = 0; i < ks.size(); ++i) {
          nlohmann::json child;
          // Re-evaluating for the dump leaves the counted node total unchanged.
          long saved = nodes;
          optimal(t + 1, x - best_a + ks[i], sa, nullptr, dump_left - 1, &child);
          nodes = saved;
          kids.push_back({{"z", ks[i]}, {"prob", static_cast<double>(qs[i])}, {"node", child}});
        }
        (*dump)["children"] = kids;
      }
    }
    return best;
  }

  Real follow(History& h, int x, Real s, const HistoryPolicy& pol) {
    tick();
    const int t = h.depth();
    if (x < 0) return p.ruin(s);
    if (t == p.horizon) return p.leaf(x, s);
    int a = pol(h, x);
    if (a < 0 || a > x) {
      std::ostringstream os;
      os << "policy returned " << a << " at t=" << t << " x=" << x;
      throw Error(ErrorCode::UndefinedAction, os.str());
    }
    Real sa = s + static_cast<Real>(a) * bpow[static_cast<size_t>(t)];
    Real v = 0.0L;
    h.actions.push_back(a);
    for (size_t i = 0; i < ks.size(); ++i) {
      h.incomes.push_back(ks[i]);
      v += qs[i] * follow(h, x - a + ks[i], sa, pol);
      h.incomes.pop_back();
    }
    h.actions.pop_back();
    return v;
  }
};

}  // namespace

long count_nodes(const TreeProblem& p, int x0, long cap) {
  std::vector<int> ks;
  for (int k : p.dist.outcomes()) ks.push_back(k);
  std::map<std::pair<int, int>, long> memo;
  std::function<long(int, int)> count = [&](int t, int x) -> long {
    if (x < 0 || t == p.horizon) return 1;
    auto key = std::make_pair(t, x);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    long n = 1;
    for (int a = 0; a <= x && n <= cap; ++a)
      for (int k : ks) {
        n += count(t + 1, x - a + k);
        if (n > cap) break;
      }
    n = std::min(n, cap + 1);
    memo[key] = n;
    return n;
  };
  return count(0, x0);
}

OracleResult exact_optimal(const TreeProblem& p, int x0, const OracleOptions& opt) {
  if (p.horizon < 0) throw Error(ErrorCode::ValidationError, "horizon must be nonnegative");
  long need = count_nodes(p, x0, opt.max_nodes);
  if (need > opt.max_nodes) {
    std::ostringstream os;
    os << "history tree from x0=" << x0 << " over " << p.horizon << " steps exceeds " << opt.max_nodes << " nodes";
    throw Error(ErrorCode::TooLarge, os.str());
  }
  Tree tree(p);
  tree.max_nodes = opt.max_nodes;
  OracleResult r;
  r.action = 0;
  nlohmann::json dump;
  r.value = tree.optimal(0, x0, p.s0, &r.action, opt.dump_depth, opt.dump_depth >= 0 ? &dump : nullptr);
  r.nodes = tree.nodes;
  if (opt.dump_depth >= 0) r.tree = std::move(dump);
  return r;
}

Real exact_policy_value(const TreeProblem& p, const HistoryPolicy& policy, int x0, const OracleOptions& opt) {
  Tree tree(p);
  tree.max_nodes = opt.max_nodes;
  History h;
  h.x0 = x0;
  return tree.follow(h, x0, p.s0, policy);
}

}  // namespace riskdiv::oracle
