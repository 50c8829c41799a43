#include <cmath>

#include "riskdiv/simd/kernels.hpp"

namespace riskdiv::simd::detail {

namespace {

void axpy_scalar(double* out, const double* src, double q, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = out[i] + q * src[i];
}

void scaled_argmin_update_scalar(double* best, std::int32_t* action, const double* g, double scale,
                                 std::int32_t a, double rel_tol, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double c = scale * g[i];
    double thr = best[i] + rel_tol * best[i];
    if (c <= thr) action[i] = a;
    best[i] = c < best[i] ? c : best[i];
  }
}

void scaled_min_update_scalar(double* best, const double* g, double scale, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double c = scale * g[i];
    best[i] = c < best[i] ? c : best[i];
  }
}

void gather_lerp_accumulate_scalar(double* lo_acc, double* hi_acc, const double* lo, const double* hi,
                                   const double* pad, const std::int32_t* idx, const double* w,
                                   const double* lenv, const double* uenv,
                                   double q, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
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

void argmax_update_scalar(double* best, std::int32_t* action, const double* cand, std::int32_t a,
                          double rel_tol, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double c = cand[i];
    double thr = best[i] - rel_tol * std::fabs(best[i]);
    if (c >= thr) action[i] = a;
    best[i] = c > best[i] ? c : best[i];
  }
}

void max_update_scalar(double* best, const double* cand, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) best[i] = cand[i] > best[i] ? cand[i] : best[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{axpy_scalar,
                                 scaled_argmin_update_scalar,
                                 scaled_min_update_scalar,
                                 gather_lerp_accumulate_scalar,
                                 argmax_update_scalar,
                                 max_update_scalar};
  return table;
}

}  // namespace riskdiv::simd::detail
