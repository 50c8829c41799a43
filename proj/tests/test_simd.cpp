#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "riskdiv/exp_solver.hpp"
#include "riskdiv/power_solver.hpp"
#include "riskdiv/simd/kernels.hpp"
#include "helpers.hpp"

using namespace riskdiv;
using simd::Isa;

namespace {

std::vector<Isa> available() {
  std::vector<Isa> v;
  for (Isa i : {Isa::Scalar, Isa::Avx2, Isa::Neon})
    if (simd::isa_available(i)) v.push_back(i);
  return v;
}

struct IsaGuard {
  Isa saved = simd::active_isa();
  ~IsaGuard() { simd::set_isa(saved); }
};

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Values with deliberate exact ties and near-ties so the tie branch is exercised.
std::vector<double> tricky(std::mt19937_64& rng, size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::uniform_int_distribution<int> pick(0, 4);
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) {
    switch (pick(rng)) {
      case 0: v[i] = 0.5; break;
      case 1: v[i] = i ? v[i - 1] : 0.25; break;
      default: v[i] = u(rng);
    }
  }
  return v;
}

}  // namespace

TEST(Simd, ScalarAlwaysAvailableAndSelectable) {
  IsaGuard g;
  EXPECT_TRUE(simd::isa_available(Isa::Scalar));
  simd::set_isa(Isa::Scalar);
  EXPECT_EQ(simd::active_isa(), Isa::Scalar);
  EXPECT_EQ(std::string(simd::isa_name(simd::detect_isa())).empty(), false);
}

TEST(Simd, UnavailableIsaIsRejected) {
  IsaGuard g;
  for (Isa i : {Isa::Avx2, Isa::Neon})
    if (!simd::isa_available(i)) {
      EXPECT_THROW(simd::set_isa(i), Error);
    }
}

TEST(Simd, AxpyBitIdenticalAcrossVariants) {
  IsaGuard g;
  std::mt19937_64 rng(1);
  for (size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 131u}) {
    auto src = tricky(rng, n, -3, 3), base = tricky(rng, n, -1, 1);
    std::vector<std::vector<double>> outs;
    for (Isa isa : available()) {
      simd::set_isa(isa);
      auto out = base;
      simd::axpy(out.data(), src.data(), 0.3711, n);
      outs.push_back(out);
    }
    for (auto& o : outs) EXPECT_TRUE(same_bits(o, outs[0])) << "n=" << n;
  }
}

TEST(Simd, ScaledArgminBitIdenticalAcrossVariants) {
  IsaGuard g;
  std::mt19937_64 rng(2);
  for (size_t n : {1u, 4u, 6u, 9u, 33u, 100u}) {
    std::vector<std::vector<double>> bests;
    std::vector<std::vector<std::int32_t>> acts;
    auto init = tricky(rng, n, 0.1, 1.0);
    std::vector<std::vector<double>> gs;
    for (int a = 0; a < 6; ++a) gs.push_back(tricky(rng, n, 0.1, 1.0));
    for (Isa isa : available()) {
      simd::set_isa(isa);
      auto best = init;
      std::vector<std::int32_t> act(n, 0);
      for (int a = 1; a < 6; ++a) {
        double scale = a % 2 ? 1.0 : std::exp(-0.01 * a);
        simd::scaled_argmin_update(best.data(), act.data(), gs[static_cast<size_t>(a)].data(), scale, a, 1e-12, n);
        simd::scaled_min_update(best.data(), gs[0].data(), 1.0, n);
      }
      bests.push_back(best);
      acts.push_back(act);
    }
    for (size_t i = 0; i < bests.size(); ++i) {
      EXPECT_TRUE(same_bits(bests[i], bests[0]));
      EXPECT_EQ(acts[i], acts[0]);
    }
  }
}

TEST(Simd, ArgmaxBitIdenticalIncludingNegativeValues) {
  IsaGuard g;
  std::mt19937_64 rng(3);
  for (size_t n : {1u, 2u, 5u, 8u, 13u, 77u}) {
    auto init = tricky(rng, n, -2.0, 2.0);
    std::vector<std::vector<double>> cands;
    for (int a = 0; a < 5; ++a) cands.push_back(tricky(rng, n, -2.0, 2.0));
    std::vector<std::vector<double>> bests;
    std::vector<std::vector<std::int32_t>> acts;
    for (Isa isa : available()) {
      simd::set_isa(isa);
      auto best = init;
      std::vector<std::int32_t> act(n, 0);
      for (int a = 0; a < 5; ++a) {
        simd::argmax_update(best.data(), act.data(), cands[static_cast<size_t>(a)].data(), a + 1, 1e-12, n);
        simd::max_update(best.data(), cands[static_cast<size_t>(a)].data(), n);
      }
      bests.push_back(best);
      acts.push_back(act);
    }
    for (size_t i = 0; i < bests.size(); ++i) {
      EXPECT_TRUE(same_bits(bests[i], bests[0]));
      EXPECT_EQ(acts[i], acts[0]);
    }
  }
}

TEST(Simd, ArgmaxKeepsLargestNearMaximiser) {
  IsaGuard g;
  for (Isa isa : available()) {
    simd::set_isa(isa);
    std::vector<double> best{1.0, 1.0, 1.0, 1.0, 1.0};
    std::vector<std::int32_t> act(5, 0);
    std::vector<double> cand{1.0, 1.0 - 1e-14, 0.9, 1.0 + 1e-9, 1.0 - 1e-10};
    simd::argmax_update(best.data(), act.data(), cand.data(), 3, 1e-12, 5);
    EXPECT_EQ(act, (std::vector<std::int32_t>{3, 3, 0, 3, 0})) << simd::isa_name(isa);
  }
}

TEST(Simd, GatherLerpBitIdenticalWithNodesCellsAndInfinitePads) {
  IsaGuard g;
  std::mt19937_64 rng(4);
  const size_t m = 40;
  for (size_t n : {0u, 1u, 3u, 4u, 9u, 38u}) {
    std::vector<double> lo(m), hi(m), pad(m);
    double acc = 0.0;
    for (size_t j = 0; j < m; ++j) {
      acc += std::uniform_real_distribution<double>(0.0, 0.2)(rng);
      lo[j] = acc;
      hi[j] = acc + 0.05;
      pad[j] = j == 0 ? std::numeric_limits<double>::infinity() : 1e-3 * static_cast<double>(j % 5);
    }
    std::vector<std::int32_t> idx(n);
    std::vector<double> w(n), lenv(n), uenv(n);
    for (size_t i = 0; i < n; ++i) {
      idx[i] = static_cast<std::int32_t>(rng() % (m - 1));
      int kind = static_cast<int>(rng() % 4);
      w[i] = kind == 0 ? 0.0 : kind == 1 ? 1.0 : std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      double mid = 0.5 * (lo[static_cast<size_t>(idx[i])] + hi[static_cast<size_t>(idx[i]) + 1]);
      lenv[i] = mid - (kind == 3 ? 0.0 : 0.3);
      uenv[i] = mid + (kind == 2 ? 0.0 : 0.3);
    }
    auto lo0 = tricky(rng, n, 0, 1), hi0 = tricky(rng, n, 0, 1);
    std::vector<std::vector<double>> los, his;
    for (Isa isa : available()) {
      simd::set_isa(isa);
      auto la = lo0, ha = hi0;
      simd::gather_lerp_accumulate(la.data(), ha.data(), lo.data(), hi.data(), pad.data(), idx.data(), w.data(),
                                   lenv.data(), uenv.data(), 0.37, n);
      los.push_back(la);
      his.push_back(ha);
    }
    for (size_t i = 0; i < los.size(); ++i) {
      EXPECT_TRUE(same_bits(los[i], los[0])) << "n=" << n;
      EXPECT_TRUE(same_bits(his[i], his[0])) << "n=" << n;
    }
  }
}

TEST(Simd, GatherLerpMatchesDefinitionOnScalar) {
  IsaGuard g;
  simd::set_isa(Isa::Scalar);
  std::vector<double> lo{0.0, 1.0, 2.0}, hi{0.5, 1.5, 2.5}, pad{0.1, 0.1, 0.1};
  std::vector<std::int32_t> idx{0, 1, 0};
  std::vector<double> w{0.0, 0.5, 1.0}, lenv{0, 1.6, -10}, uenv{0, 1.7, 10};
  std::vector<double> la(3, 0.0), ha(3, 0.0);
  simd::gather_lerp_accumulate(la.data(), ha.data(), lo.data(), hi.data(), pad.data(), idx.data(), w.data(),
                               lenv.data(), uenv.data(), 2.0, 3);
  EXPECT_DOUBLE_EQ(la[0], 0.0);
  EXPECT_DOUBLE_EQ(ha[0], 1.0);
  EXPECT_DOUBLE_EQ(la[1], 2.0 * 1.6);          // lerp 1.5 raised to the lower envelope
  EXPECT_DOUBLE_EQ(ha[1], 2.0 * 1.7);          // min(2.0 + 0.1, 2.5, 1.7)
  EXPECT_DOUBLE_EQ(la[2], 2.0);
  EXPECT_DOUBLE_EQ(ha[2], 2.0 * 1.5);  // w = 1 lands on the upper node
}

// End-to-end: whole solver outputs do not depend on the instruction set.
TEST(Simd, SolversBitIdenticalAcrossVariants) {
  IsaGuard g;
  using fixtures::exp_config;
  using fixtures::power_config;
  auto d = two_point_distribution(0.6, 1);
  auto ecfg = exp_config(d, 0.9, -0.5, 50);
  auto pcfg = power_config(validate_distribution({{-1, 0.5}, {1, 0.5}}), 0.5, 0.5, 4, 6, 300);
  std::vector<ExpSolution> es;
  std::vector<PowerSolution> ps;
  for (Isa isa : available()) {
    simd::set_isa(isa);
    es.push_back(solve_exp(ecfg));
    ps.push_back(solve_power(pcfg));
  }
  for (size_t i = 1; i < es.size(); ++i) {
    EXPECT_TRUE(es[i].policy == es[0].policy);
    for (int n = 0; n <= es[0].schedule.depth(); ++n)
      for (int x = -1; x <= ecfg.x_max; ++x) {
        EXPECT_EQ(es[i].values.lo(n, x), es[0].values.lo(n, x));
        EXPECT_EQ(es[i].values.hi(n, x), es[0].values.hi(n, x));
      }
    for (int dd = 0; dd <= ps[0].depth; ++dd)
      for (int x = 0; x <= pcfg.x_max; ++x)
        for (int j = 0; j < ps[0].grid.size(); ++j) {
          EXPECT_EQ(ps[i].values.lo(dd, x, j), ps[0].values.lo(dd, x, j));
          EXPECT_EQ(ps[i].values.hi(dd, x, j), ps[0].values.hi(dd, x, j));
          if (dd < ps[0].depth) {
            EXPECT_EQ(ps[i].policy.action(dd, x, j), ps[0].policy.action(dd, x, j));
          }
        }
  }
}
