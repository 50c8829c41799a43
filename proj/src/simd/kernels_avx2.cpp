// Compiled with -mavx2 only; reached through the runtime dispatcher after a
// CPU feature check. No FMA so that every lane rounds like the scalar loop.
#include <immintrin.h>

#include <cmath>

#include "riskdiv/simd/kernels.hpp"

namespace riskdiv::simd::detail {

namespace {

// 64-bit lane mask to 32-bit lanes, for blending the int32 action array.
inline __m128i narrow_mask(__m256d m) {
  const __m256i pick = _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6);
  return _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(_mm256_castpd_si256(m), pick));
}

void axpy_avx2(double* out, const double* src, double q, std::size_t n) {
  const __m256d vq = _mm256_set1_pd(q);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d o = _mm256_loadu_pd(out + i);
    __m256d s = _mm256_loadu_pd(src + i);
    _mm256_storeu_pd(out + i, _mm256_add_pd(o, _mm256_mul_pd(vq, s)));
  }
  for (; i < n; ++i) out[i] = out[i] + q * src[i];
}

void scaled_argmin_update_avx2(double* best, std::int32_t* action, const double* g, double scale,
                               std::int32_t a, double rel_tol, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d vt = _mm256_set1_pd(rel_tol);
  const __m128i va = _mm_set1_epi32(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d b = _mm256_loadu_pd(best + i);
    __m256d c = _mm256_mul_pd(vs, _mm256_loadu_pd(g + i));
    __m256d thr = _mm256_add_pd(b, _mm256_mul_pd(vt, b));
    __m256d take = _mm256_cmp_pd(c, thr, _CMP_LE_OQ);
    __m128i m32 = narrow_mask(take);
    __m128i old = _mm_loadu_si128(reinterpret_cast<const __m128i*>(action + i));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(action + i), _mm_blendv_epi8(old, va, m32));
    _mm256_storeu_pd(best + i, _mm256_min_pd(c, b));
  }
  for (; i < n; ++i) {
    double c = scale * g[i];
    double thr = best[i] + rel_tol * best[i];
    if (c <= thr) action[i] = a;
    best[i] = c < best[i] ? c : best[i];
  }
}

void scaled_min_update_avx2(double* best, const double* g, double scale, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d c = _mm256_mul_pd(vs, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(best + i, _mm256_min_pd(c, _mm256_loadu_pd(best + i)));
  }
  for (; i < n; ++i) {
    double c = scale * g[i];
    best[i] = c < best[i] ? c : best[i];
  }
}

void gather_lerp_accumulate_avx2(double* lo_acc, double* hi_acc, const double* lo, const double* hi,
                                 const double* pad, const std::int32_t* idx, const double* w,
                                 const double* lenv, const double* uenv,
                                 double q, std::size_t n) {
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m128i j = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + i));
    __m256d t = _mm256_loadu_pd(w + i);
    __m256d u = _mm256_sub_pd(one, t);
    __m256d lo0 = _mm256_i32gather_pd(lo, j, 8);
    __m256d lo1 = _mm256_i32gather_pd(lo + 1, j, 8);
    __m256d hi0 = _mm256_i32gather_pd(hi, j, 8);
    __m256d hi1 = _mm256_i32gather_pd(hi + 1, j, 8);
    __m256d pd = _mm256_i32gather_pd(pad, j, 8);
    __m256d l = _mm256_add_pd(_mm256_mul_pd(u, lo0), _mm256_mul_pd(t, lo1));
    __m256d h = _mm256_add_pd(_mm256_mul_pd(u, hi0), _mm256_mul_pd(t, hi1));
    __m256d inside = _mm256_cmp_pd(t, zero, _CMP_GT_OQ);
    __m256d hp = _mm256_min_pd(_mm256_add_pd(h, pd), hi1);
    hp = _mm256_min_pd(_mm256_loadu_pd(uenv + i), hp);
    __m256d lp = _mm256_max_pd(_mm256_loadu_pd(lenv + i), l);
    h = _mm256_blendv_pd(h, hp, inside);
    l = _mm256_blendv_pd(l, lp, inside);
    _mm256_storeu_pd(lo_acc + i, _mm256_add_pd(_mm256_loadu_pd(lo_acc + i), _mm256_mul_pd(vq, l)));
    _mm256_storeu_pd(hi_acc + i, _mm256_add_pd(_mm256_loadu_pd(hi_acc + i), _mm256_mul_pd(vq, h)));
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

void argmax_update_avx2(double* best, std::int32_t* action, const double* cand, std::int32_t a,
                        double rel_tol, std::size_t n) {
  const __m256d vt = _mm256_set1_pd(rel_tol);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m128i va = _mm_set1_epi32(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d b = _mm256_loadu_pd(best + i);
    __m256d c = _mm256_loadu_pd(cand + i);
    __m256d thr = _mm256_sub_pd(b, _mm256_mul_pd(vt, _mm256_andnot_pd(sign, b)));
    __m256d take = _mm256_cmp_pd(c, thr, _CMP_GE_OQ);
    __m128i m32 = narrow_mask(take);
    __m128i old = _mm_loadu_si128(reinterpret_cast<const __m128i*>(action + i));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(action + i), _mm_blendv_epi8(old, va, m32));
    _mm256_storeu_pd(best + i, _mm256_max_pd(c, b));
  }
  for (; i < n; ++i) {
    double c = cand[i];
    double thr = best[i] - rel_tol * std::fabs(best[i]);
    if (c >= thr) action[i] = a;
    best[i] = c > best[i] ? c : best[i];
  }
}

void max_update_avx2(double* best, const double* cand, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(best + i, _mm256_max_pd(_mm256_loadu_pd(cand + i), _mm256_loadu_pd(best + i)));
  for (; i < n; ++i) best[i] = cand[i] > best[i] ? cand[i] : best[i];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{axpy_avx2,
                                 scaled_argmin_update_avx2,
                                 scaled_min_update_avx2,
                                 gather_lerp_accumulate_avx2,
                                 argmax_update_avx2,
                                 max_update_avx2};
  return table;
}

}  // namespace riskdiv::simd::detail
