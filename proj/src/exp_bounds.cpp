#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskdiv/exp_solver.hpp"

namespace riskdiv {

namespace {

// sum_k q_k expm1(t max(k,0)); accurate when t is tiny.
double mgf_plus_m1(const IncomeDistribution& dist, double t) {
  double s = 0.0;
  for (int k = std::max(1, dist.support_min()); k <= dist.support_max(); ++k) {
    double q = dist.prob(k);
    if (q > 0.0) s += q * std::expm1(t * k);
  }
  return s;
}

// Truncation target for the infinite products and recursions. It scales with
// |theta| so that log-ratios of the brackets stay accurate as theta -> 0.
double truncation_target(double theta, double tail_eps) {
  return tail_eps * std::min(1.0, std::fabs(theta));
}

Bracket from_logs(double log_lo, double log_hi) {
  Bracket b;
  b.log_lo = log_lo;
  b.log_hi = log_hi;
  b.lo = std::exp(log_lo);
  b.hi = std::exp(log_hi);
  return b;
}

}  // namespace

ThetaSchedule ThetaSchedule::make(double gamma, double beta, int depth) {
  ThetaSchedule s;
  s.gamma = gamma;
  s.beta = beta;
  s.thetas.resize(static_cast<size_t>(depth) + 1);
  double t = gamma;
  for (int n = 0; n <= depth; ++n) {
    s.thetas[static_cast<size_t>(n)] = t;
    t *= beta;
  }
  return s;
}

double mgf_plus(const IncomeDistribution& dist, double t) {
  double s = 0.0;
  for (int k = dist.support_min(); k <= dist.support_max(); ++k) {
    double q = dist.prob(k);
    if (q > 0.0) s += q * std::exp(t * std::max(k, 0));
  }
  // Masses sum to 1 up to round-off; the exact value never exceeds 1 for t <= 0.
  return std::min(s, 1.0);
}

Bracket h_lower(const IncomeDistribution& dist, double beta, double theta, double tail_eps) {
  const double ez = dist.expected_positive();
  if (ez == 0.0 || theta == 0.0) return from_logs(0.0, 0.0);
  const double target = truncation_target(theta, tail_eps);
  // Each omitted factor is at least exp(theta beta^k E Z+) by Jensen, so the
  // tail beyond K contributes at least exp(theta beta^{K+1} E Z+ / (1 - beta)).
  double log_partial = 0.0;
  double t = theta;
  for (int k = 1; k < 100000; ++k) {
    t *= beta;
    log_partial += std::log1p(mgf_plus_m1(dist, t));
    double tail = t * beta * ez / (1.0 - beta);
    if (-tail <= target) return from_logs(log_partial + tail, log_partial);
  }
  throw Error(ErrorCode::InvariantViolation, "lower tail product did not converge");
}

Bracket h_upper(const IncomeDistribution& dist, double beta, double theta, double tail_eps) {
  const double ez = dist.expected_positive();
  if (ez == 0.0 || theta == 0.0) return from_logs(0.0, 0.0);
  const double target = truncation_target(theta, tail_eps);

  // e(t) = 1 - D(t) obeys e(t) = sum_{m>=0} q_m (1 - e^{t beta m}) + M(t beta) e(t beta)
  // with M(u) = sum_{m>=0} q_m e^{u m}. Unroll K steps, then bound e(theta beta^K)
  // by [0, 1 - h_lower]. Working with e keeps full relative accuracy for small theta.
  int K = 1;
  double tk = theta * beta;
  while (-tk * beta * ez / (1.0 - beta) > target && K < 100000) {
    tk *= beta;
    ++K;
  }
  Bracket tail = h_lower(dist, beta, tk, tail_eps);
  double e_lo = 0.0;
  double e_hi = -std::expm1(tail.log_lo);

  std::vector<double> ts(static_cast<size_t>(K));
  double t = theta;
  for (int j = 0; j < K; ++j) {
    ts[static_cast<size_t>(j)] = t;
    t *= beta;
  }
  for (int j = K - 1; j >= 0; --j) {
    double tb = ts[static_cast<size_t>(j)] * beta;
    double a = 0.0, m = 0.0;
    for (int k = std::max(0, dist.support_min()); k <= dist.support_max(); ++k) {
      double q = dist.prob(k);
      if (q <= 0.0) continue;
      a -= q * std::expm1(tb * k);
      m += q * std::exp(tb * k);
    }
    e_lo = a + m * e_lo;
    e_hi = a + m * e_hi;
  }
  e_hi = std::min(e_hi, 1.0);
  return from_logs(std::log1p(-e_hi), std::log1p(-e_lo));
}

double s_bound(const IncomeDistribution& dist, double beta, double theta, double tail_eps) {
  if (theta == 0.0) return 0.0;
  Bracket lo = h_lower(dist, beta, theta, tail_eps);
  Bracket hi = h_upper(dist, beta, theta, tail_eps);
  double s = (hi.log_hi - lo.log_lo) / (theta * (beta - 1.0));
  return std::max(s, 0.0);
}

int auto_exp_depth(const IncomeDistribution& dist, double gamma, double beta, double tail_eps) {
  double t = gamma;
  for (int n = 1; n <= 1000000; ++n) {
    t *= beta;
    Bracket lo = h_lower(dist, beta, t, tail_eps);
    Bracket hi = h_upper(dist, beta, t, tail_eps);
    if (std::min(hi.hi, 1.0) - lo.lo <= tail_eps) return n;
  }
  throw Error(ErrorCode::DepthTooSmall, "no depth reaches the requested tail tolerance");
}

ExpSolution exp_tail_setup(const ProblemConfig& cfg) {
  cfg.validate();
  if (cfg.utility != Utility::Exponential)
    throw Error(ErrorCode::ValidationError, "exponential solver needs utility = exponential");
  int depth = cfg.depth > 0 ? cfg.depth : auto_exp_depth(cfg.dist, cfg.gamma, cfg.beta, cfg.tail_eps);

  ExpSolution sol;
  sol.schedule = ThetaSchedule::make(cfg.gamma, cfg.beta, depth);
  sol.h_low.resize(static_cast<size_t>(depth) + 1);
  sol.h_high.resize(static_cast<size_t>(depth) + 1);
  sol.s_theta.resize(static_cast<size_t>(depth) + 1);
  for (int n = 0; n <= depth; ++n) {
    double th = sol.schedule.theta(n);
    Bracket lo = h_lower(cfg.dist, cfg.beta, th, cfg.tail_eps);
    Bracket hi = h_upper(cfg.dist, cfg.beta, th, cfg.tail_eps);
    sol.h_low[static_cast<size_t>(n)] = lo;
    sol.h_high[static_cast<size_t>(n)] = hi;
    double s = (hi.log_hi - lo.log_lo) / (th * (cfg.beta - 1.0));
    sol.s_theta[static_cast<size_t>(n)] = std::max(s, 0.0);
    sol.s_star = std::max(sol.s_star, sol.s_theta[static_cast<size_t>(n)]);
  }
  if (cfg.x_max < static_cast<int>(std::ceil(sol.s_star))) {
    std::ostringstream os;
    os << "x_max = " << cfg.x_max << " is below the barrier bound s* = " << sol.s_star
       << "; use x_max >= " << static_cast<int>(std::ceil(sol.s_star));
    throw Error(ErrorCode::CapTooSmall, os.str());
  }
  return sol;
}

}  // namespace riskdiv
