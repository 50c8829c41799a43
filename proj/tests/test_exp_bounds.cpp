#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "riskdiv/exp_solver.hpp"
#include "helpers.hpp"

using namespace riskdiv;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Stored masses sum to 1 only up to round-off; normalise them exactly here.
Big big_mgf(const IncomeDistribution& d, const Big& t) {
  Big s = 0, total = 0;
  for (int k = d.support_min(); k <= d.support_max(); ++k) {
    s += Big(d.prob(k)) * exp(t * std::max(k, 0));
    total += Big(d.prob(k));
  }
  return s / total;
}

// prod_{k>=1} mgf_plus(theta beta^k) to 50 digits; factors differ from 1 by O(beta^k).
Big big_h_lower(const IncomeDistribution& d, double beta, double theta) {
  Big p = 1, t = theta;
  for (int k = 1; k < 400; ++k) {
    t *= Big(beta);
    p *= big_mgf(d, t);
  }
  return p;
}

}  // namespace

TEST(MgfPlus, Examples) {
  EXPECT_DOUBLE_EQ(mgf_plus(validate_distribution({{-1, 1.0}}), -1.0), 1.0);
  auto sym = validate_distribution({{-1, 0.5}, {1, 0.5}});
  double expected = static_cast<double>(big_mgf(sym, Big(-1)));
  EXPECT_NEAR(mgf_plus(sym, -1.0), expected, 1e-16);
  EXPECT_NEAR(expected, 0.6839397, 1e-7);
  EXPECT_DOUBLE_EQ(mgf_plus(two_point_distribution(0.3, 2), 0.0), 1.0);
}

TEST(MgfPlus, RangeProperty) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    auto d = fixtures::random_distribution(rng, 5);
    double t = -std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    double m = mgf_plus(d, t);
    EXPECT_GT(m, 0.0);
    EXPECT_LE(m, 1.0);
    EXPECT_NEAR(m, static_cast<double>(big_mgf(d, Big(t))), 1e-15);
  }
}

TEST(HLower, DegenerateIsOne) {
  auto d = fixtures::always_minus_one();
  for (double th : {-3.0, -1.0, -1e-6}) {
    Bracket b = h_lower(d, 0.9, th, 1e-10);
    EXPECT_EQ(b.lo, 1.0);
    EXPECT_EQ(b.hi, 1.0);
  }
}

TEST(HLower, EnclosesHighPrecisionProduct) {
  auto sym = validate_distribution({{-1, 0.5}, {1, 0.5}});
  Bracket b = h_lower(sym, 0.5, -1.0, 1e-10);
  double truth = static_cast<double>(big_h_lower(sym, 0.5, -1.0));
  EXPECT_LE(b.hi - b.lo, 1e-10);
  EXPECT_LE(b.lo, truth * (1 + 1e-15));
  EXPECT_GE(b.hi, truth * (1 - 1e-15));
}

TEST(HLower, EnclosesProductOnRandomInstances) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 40; ++i) {
    auto d = fixtures::random_distribution(rng, 4);
    double beta = std::uniform_real_distribution<double>(0.3, 0.95)(rng);
    double th = -std::uniform_real_distribution<double>(0.01, 3.0)(rng);
    Bracket b = h_lower(d, beta, th, 1e-9);
    double truth = static_cast<double>(big_h_lower(d, beta, th));
    EXPECT_LE(b.lo, truth * (1 + 1e-14));
    EXPECT_GE(b.hi, truth * (1 - 1e-14));
    EXPECT_LE(b.hi - b.lo, 1e-9 + 1e-15);
  }
}

TEST(HLower, ApproachesOneAsThetaVanishes) {
  auto d = two_point_distribution(0.6, 1);
  Bracket b = h_lower(d, 0.9, -1e-12, 1e-10);
  EXPECT_NEAR(b.lo, 1.0, 1e-10);
  EXPECT_NEAR(b.hi, 1.0, 1e-10);
}

TEST(HUpper, DegenerateIsOne) {
  Bracket b = h_upper(fixtures::always_minus_one(), 0.9, -1.0, 1e-10);
  EXPECT_EQ(b.lo, 1.0);
  EXPECT_EQ(b.hi, 1.0);
}

// D(theta) = E exp(theta sum_{k < tau} beta^k Z_k), tau the first negative income.
TEST(HUpper, MonteCarloOfPayAllPolicy) {
  auto sym = validate_distribution({{-1, 0.5}, {1, 0.5}});
  const double beta = 0.5, th = -1.0;
  Bracket b = h_upper(sym, beta, th, 1e-10);
  std::mt19937_64 rng(23);
  const int n = 1'000'000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double e = 0.0, bk = beta;
    while (rng() & 1ULL) {  // Z = +1 with probability 1/2
      e += bk;
      bk *= beta;
    }
    double v = std::exp(th * e);
    sum += v;
    sq += v * v;
  }
  double mean = sum / n, sd = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_LE(b.lo - 3 * sd, mean);
  EXPECT_GE(b.hi + 3 * sd, mean);
  EXPECT_LE(b.hi - b.lo, 1e-9);
}

TEST(HUpper, DominatesLowerFactor) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 50; ++i) {
    auto d = fixtures::random_distribution(rng, 4);
    double beta = std::uniform_real_distribution<double>(0.3, 0.95)(rng);
    double th = -std::uniform_real_distribution<double>(0.01, 2.0)(rng);
    Bracket lo = h_lower(d, beta, th, 1e-10), hi = h_upper(d, beta, th, 1e-10);
    EXPECT_LE(lo.lo, hi.hi);
    EXPECT_LE(hi.hi, 1.0);
    EXPECT_LE(hi.lo, hi.hi);
  }
}

TEST(SBound, Examples) {
  EXPECT_EQ(s_bound(fixtures::always_minus_one(), 0.9, -1.0, 1e-10), 0.0);
  auto sym = validate_distribution({{-1, 0.5}, {1, 0.5}});
  double s = s_bound(sym, 0.5, -1.0, 1e-10);
  EXPECT_GT(s, 0.0);
  EXPECT_TRUE(std::isfinite(s));
  Bracket lo = h_lower(sym, 0.5, -1.0, 1e-10), hi = h_upper(sym, 0.5, -1.0, 1e-10);
  EXPECT_NEAR(s, (hi.log_hi - lo.log_lo) / (-1.0 * (0.5 - 1.0)), 1e-12);
}

TEST(TailSetup, CapBelowBarrierBoundIsRejected) {
  auto cfg = fixtures::exp_config(two_point_distribution(0.6, 1), 0.9, -0.5, 10);
  try {
    exp_tail_setup(cfg);
    FAIL() << "expected CapTooSmall";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CapTooSmall);
  }
}

TEST(TailSetup, ScheduleAndStarBound) {
  auto cfg = fixtures::exp_config(two_point_distribution(0.6, 1), 0.9, -0.5, 50);
  ExpSolution s = exp_tail_setup(cfg);
  const int N = s.schedule.depth();
  EXPECT_GT(N, 0);
  for (int n = 0; n <= N; ++n) {
    EXPECT_DOUBLE_EQ(s.schedule.theta(n), n == 0 ? -0.5 : s.schedule.theta(n - 1) * 0.9);
    EXPECT_LE(s.s_theta[static_cast<size_t>(n)], s.s_star);
  }
  for (int n = 1; n <= N; ++n) EXPECT_GT(s.schedule.theta(n), s.schedule.theta(n - 1));
  EXPECT_LE(s.h_high[static_cast<size_t>(N)].hi - s.h_low[static_cast<size_t>(N)].lo, cfg.tail_eps);
  EXPECT_LE(s.s_star, cfg.x_max);
}
