#pragma once

#include <cstddef>
#include <cstdint>

namespace riskdiv::simd {

enum class Isa { Scalar, Avx2, Neon };

const char* isa_name(Isa isa);
bool isa_available(Isa isa);
// Best instruction set supported by this CPU and build.
Isa detect_isa();
Isa active_isa();
// Forces a variant; throws ValidationError when it is not available.
// RISKDIV_ISA=scalar|avx2|neon in the environment does the same at startup.
void set_isa(Isa isa);

// All variants produce bit-identical results: no fused multiply-add, the same
// operation order per lane, and min/max with the same operand preference.

// out[i] += q * src[i]
void axpy(double* out, const double* src, double q, std::size_t n);

// c = scale * g[i]; if c <= best[i] + rel_tol * best[i] then action[i] = a;
// best[i] = min(best[i], c). Feeding actions in ascending order leaves the
// largest near-minimiser in action[].
void scaled_argmin_update(double* best, std::int32_t* action, const double* g, double scale,
                          std::int32_t a, double rel_tol, std::size_t n);

// best[i] = min(best[i], scale * g[i])
void scaled_min_update(double* best, const double* g, double scale, std::size_t n);

// For each i with j = idx[i], t = w[i], l = (1-t) lo[j] + t lo[j+1] and
// h = (1-t) hi[j] + t hi[j+1]; strictly inside a cell (t > 0) the ends are
// tightened against the envelopes: l = max(l, lenv[i]) and
// h = min(min(h + pad[j], hi[j+1]), uenv[i]). Then
//   lo_acc[i] += q * l,  hi_acc[i] += q * h.
// lenv/uenv must be readable for all i but only matter where t > 0.
void gather_lerp_accumulate(double* lo_acc, double* hi_acc, const double* lo, const double* hi,
                            const double* pad, const std::int32_t* idx, const double* w,
                            const double* lenv, const double* uenv, double q, std::size_t n);

// if cand[i] >= best[i] - rel_tol * |best[i]| then action[i] = a;
// best[i] = max(best[i], cand[i]).
void argmax_update(double* best, std::int32_t* action, const double* cand, std::int32_t a,
                   double rel_tol, std::size_t n);

// best[i] = max(best[i], cand[i])
void max_update(double* best, const double* cand, std::size_t n);

namespace detail {

struct KernelTable {
  void (*axpy)(double*, const double*, double, std::size_t);
  void (*scaled_argmin_update)(double*, std::int32_t*, const double*, double, std::int32_t, double,
                               std::size_t);
  void (*scaled_min_update)(double*, const double*, double, std::size_t);
  void (*gather_lerp_accumulate)(double*, double*, const double*, const double*, const double*,
                                 const std::int32_t*, const double*, const double*, const double*, double,
                                 std::size_t);
  void (*argmax_update)(double*, std::int32_t*, const double*, std::int32_t, double, std::size_t);
  void (*max_update)(double*, const double*, std::size_t);
};

const KernelTable& scalar_table();
#if defined(RISKDIV_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(RISKDIV_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace detail

}  // namespace riskdiv::simd
