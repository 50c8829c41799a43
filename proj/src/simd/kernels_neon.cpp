// AArch64 variant. Two double lanes per vector; min/max are written as
// compare-and-select so equal operands resolve exactly like the scalar loop.
#include <arm_neon.h>

#include <cmath>

#include "riskdiv/simd/kernels.hpp"

namespace riskdiv::simd::detail {

namespace {

inline float64x2_t select_less(float64x2_t c, float64x2_t b) { return vbslq_f64(vcltq_f64(c, b), c, b); }
inline float64x2_t select_greater(float64x2_t c, float64x2_t b) { return vbslq_f64(vcgtq_f64(c, b), c, b); }

inline void blend_action(std::int32_t* action, uint64x2_t take, std::int32_t a) {
  if (vgetq_lane_u64(take, 0)) action[0] = a;
  if (vgetq_lane_u64(take, 1)) action[1] = a;
}

void axpy_neon(double* out, const double* src, double q, std::size_t n) {
  const float64x2_t vq = vdupq_n_f64(q);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(out + i), vmulq_f64(vq, vld1q_f64(src + i))));
  for (; i < n; ++i) out[i] = out[i] + q * src[i];
}

void scaled_argmin_update_neon(double* best, std::int32_t* action, const double* g, double scale,
                               std::int32_t a, double rel_tol, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(scale);
  const float64x2_t vt = vdupq_n_f64(rel_tol);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t b = vld1q_f64(best + i);
    float64x2_t c = vmulq_f64(vs, vld1q_f64(g + i));
    float64x2_t thr = vaddq_f64(b, vmulq_f64(vt, b));
    blend_action(action + i, vcleq_f64(c, thr), a);
    vst1q_f64(best + i, select_less(c, b));
  }
  for (; i < n; ++i) {
    double c = scale * g[i];
    double thr = best[i] + rel_tol * best[i];
    if (c <= thr) action[i] = a;
    best[i] = c < best[i] ? c : best[i];
  }
}

void scaled_min_update_neon(double* best, const double* g, double scale, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(scale);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t c = vmulq_f64(vs, vld1q_f64(g + i));
    vst1q_f64(best + i, select_less(c, vld1q_f64(best + i)));
  }
  for (; i < n; ++i) {
    double c = scale * g[i];
    best[i] = c < best[i] ? c : best[i];
  }
}

inline float64x2_t gather2(const double* base, std::int32_t j0, std::int32_t j1) {
  float64x2_t v = vdupq_n_f64(base[j0]);
  return vsetq_lane_f64(base[j1], v, 1);
}

void gather_lerp_accumulate_neon(double* lo_acc, double* hi_acc, const double* lo, const double* hi,
                                 const double* pad, const std::int32_t* idx, const double* w,
                                 const double* lenv, const double* uenv,
                                 double q, std::size_t n) {
  const float64x2_t vq = vdupq_n_f64(q);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    std::int32_t j0 = idx[i], j1 = idx[i + 1];
    float64x2_t t = vld1q_f64(w + i);
    float64x2_t u = vsubq_f64(one, t);
    float64x2_t hi1 = gather2(hi + 1, j0, j1);
    float64x2_t l = vaddq_f64(vmulq_f64(u, gather2(lo, j0, j1)), vmulq_f64(t, gather2(lo + 1, j0, j1)));
    float64x2_t h = vaddq_f64(vmulq_f64(u, gather2(hi, j0, j1)), vmulq_f64(t, hi1));
    uint64x2_t inside = vcgtq_f64(t, zero);
    float64x2_t hp = select_less(vaddq_f64(h, gather2(pad, j0, j1)), hi1);
    hp = select_less(vld1q_f64(uenv + i), hp);
    float64x2_t lp = select_greater(vld1q_f64(lenv + i), l);
    h = vbslq_f64(inside, hp, h);
    l = vbslq_f64(inside, lp, l);
    vst1q_f64(lo_acc + i, vaddq_f64(vld1q_f64(lo_acc + i), vmulq_f64(vq, l)));
    vst1q_f64(hi_acc + i, vaddq_f64(vld1q_f64(hi_acc + i), vmulq_f64(vq, h)));
  }
  for (; i < n; ++i) {
    std::int32_t j = idx[i];
    double t = w[i];
    double u = 1.0 - t;
    double l = u * lo[j] + t * lo[j + 1];
    double h = u * hi[j] + t * hi[j + 1];
    if (t > 0.0) {
      double p = h + pad[j];
      h = p < hi[j + 1] ? p : hi[j + 1];
      h = uenv[i] < h ? uenv[i] : h;
      l = lenv[i] > l ? lenv[i] : l;
    }
    lo_acc[i] = lo_acc[i] + q * l;
    hi_acc[i] = hi_acc[i] + q * h;
  }
}

void argmax_update_neon(double* best, std::int32_t* action, const double* cand, std::int32_t a,
                        double rel_tol, std::size_t n) {
  const float64x2_t vt = vdupq_n_f64(rel_tol);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t b = vld1q_f64(best + i);
    float64x2_t c = vld1q_f64(cand + i);
    float64x2_t thr = vsubq_f64(b, vmulq_f64(vt, vabsq_f64(b)));
    blend_action(action + i, vcgeq_f64(c, thr), a);
    vst1q_f64(best + i, select_greater(c, b));
  }
  for (; i < n; ++i) {
    double c = cand[i];
    double thr = best[i] - rel_tol * std::fabs(best[i]);
    if (c >= thr) action[i] = a;
    best[i] = c > best[i] ? c : best[i];
  }
}

void max_update_neon(double* best, const double* cand, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(best + i, select_greater(vld1q_f64(cand + i), vld1q_f64(best + i)));
  for (; i < n; ++i) best[i] = cand[i] > best[i] ? cand[i] : best[i];
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{axpy_neon,
                                 scaled_argmin_update_neon,
                                 scaled_min_update_neon,
                                 gather_lerp_accumulate_neon,
                                 argmax_update_neon,
                                 max_update_neon};
  return table;
}

}  // namespace riskdiv::simd::detail
