#include "riskdiv/simulate.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <sstream>

#include "riskdiv/parallel.hpp"

namespace riskdiv {

PolicyFn exp_policy_fn(const ExpPolicy& policy) {
  return [policy](int t, int x, double) {
    int n = std::min(t, policy.depth() - 1);
    return static_cast<int>(policy.action(n, x));
  };
}

PolicyFn power_policy_fn(const PowerSolution& sol) {
  return [&sol](int t, int x, double s) { return sol.action_at(t, x, s); };
}

PolicyFn pay_all_fn() {
  return [](int, int x, double) { return x; };
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) {
  std::uint64_t z = seed + (path + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

SimulationResult simulate_paths(const ProblemConfig& cfg, const PolicyFn& policy, const SimulationOptions& opt) {
  if (opt.n_paths <= 0) throw Error(ErrorCode::ValidationError, "n_paths must be positive");
  if (opt.max_steps <= 0) throw Error(ErrorCode::ValidationError, "max_steps must be positive");
  if (opt.x0 < 0) throw Error(ErrorCode::ValidationError, "x0 must be nonnegative");
  const IncomeDistribution& dist = cfg.dist;
  std::vector<double> cum;
  std::vector<int> outcome;
  double acc = 0.0;
  for (int k = dist.support_min(); k <= dist.support_max(); ++k) {
    if (dist.prob(k) == 0.0) continue;
    acc += dist.prob(k);
    cum.push_back(acc);
    outcome.push_back(k);
  }
  cum.back() = 2.0;  // absorb round-off so every draw maps to an outcome

  const size_t n = static_cast<size_t>(opt.n_paths);
  std::vector<double> sums(n), utils(n), times(n);
  std::vector<std::uint8_t> ruined(n);
  std::exception_ptr failure;
  const double base = cfg.utility == Utility::Power || cfg.utility == Utility::Logarithmic ? cfg.y0 : 0.0;

#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long p = 0; p < opt.n_paths; ++p) {
    try {
      std::mt19937_64 eng(path_seed(opt.seed, static_cast<std::uint64_t>(p)));
      int x = opt.x0;
      double s = base;
      double disc = 1.0;
      int t = 0;
      for (; t < opt.max_steps && x >= 0; ++t) {
        int a = policy(t, x, s);
        if (a < 0 || a > x) {
          std::ostringstream os;
          os << "policy returned " << a << " at t=" << t << " x=" << x;
          throw Error(ErrorCode::PolicyUndefined, os.str());
        }
        s += disc * a;
        disc *= cfg.beta;
        double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
        size_t i = 0;
        while (u >= cum[i]) ++i;
        x = x - a + outcome[i];
      }
      size_t idx = static_cast<size_t>(p);
      sums[idx] = s - base;
      utils[idx] = utility(cfg.utility, cfg.gamma, s);
      ruined[idx] = x < 0;
      times[idx] = t;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  SimulationResult r;
  r.n_paths = opt.n_paths;
  const double nd = static_cast<double>(n);
  r.mean_utility = pairwise_sum(utils.data(), n) / nd;
  std::vector<double> sq(n);
  for (size_t i = 0; i < n; ++i) sq[i] = (utils[i] - r.mean_utility) * (utils[i] - r.mean_utility);
  double var = n > 1 ? pairwise_sum(sq.data(), n) / (nd - 1.0) : 0.0;
  r.std_err = std::sqrt(var / nd);
  long n_ruined = 0;
  for (std::uint8_t b : ruined) n_ruined += b;
  r.ruin_fraction = static_cast<double>(n_ruined) / nd;
  r.truncated_fraction = 1.0 - r.ruin_fraction;
  r.mean_ruin_time = pairwise_sum(times.data(), n) / nd;
  r.truncation_bound = std::pow(cfg.beta, opt.max_steps) * cfg.x_max / (1.0 - cfg.beta);
  if (opt.keep_paths) {
    r.discounted_sum = std::move(sums);
    r.ruin_time.resize(n);
    for (size_t i = 0; i < n; ++i) r.ruin_time[i] = static_cast<int>(times[i]);
  }
  return r;
}

double ruin_block_bound(double p_neg, double xi_star, int max_steps) {
  double k = std::floor(xi_star) + 1.0;
  double blocks = std::floor(max_steps / k);
  double hit = std::pow(p_neg, k);
  return 1.0 - std::pow(1.0 - hit, blocks);
}

RuinCheck ruin_certainty_check(const ProblemConfig& cfg, const PolicyFn& policy, double xi_star,
                               const SimulationOptions& opt) {
  RuinCheck c;
  SimulationResult r = simulate_paths(cfg, policy, opt);
  c.fraction = r.ruin_fraction;
  if (!std::isfinite(xi_star) || xi_star < 0.0) {
    c.asserted = false;
    return c;
  }
  c.bound = ruin_block_bound(cfg.dist.ruin_mass(), xi_star, opt.max_steps);
  c.sigma = std::sqrt(c.bound * (1.0 - c.bound) / static_cast<double>(opt.n_paths));
  c.pass = c.fraction >= c.bound - 5.0 * c.sigma;
  return c;
}

}  // namespace riskdiv
