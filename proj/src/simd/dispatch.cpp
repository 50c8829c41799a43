#include <atomic>
#include <cstdlib>
#include <cstring>

#include "riskdiv/error.hpp"
#include "riskdiv/simd/kernels.hpp"

namespace riskdiv::simd {

namespace {

const detail::KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &detail::scalar_table();
    case Isa::Avx2:
#if defined(RISKDIV_HAVE_AVX2)
      return &detail::avx2_table();
#else
      return nullptr;
#endif
    case Isa::Neon:
#if defined(RISKDIV_HAVE_NEON)
      return &detail::neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Isa initial_isa() {
  Isa isa = detect_isa();
  if (const char* env = std::getenv("RISKDIV_ISA")) {
    if (std::strcmp(env, "scalar") == 0) isa = Isa::Scalar;
    else if (std::strcmp(env, "avx2") == 0 && isa_available(Isa::Avx2)) isa = Isa::Avx2;
    else if (std::strcmp(env, "neon") == 0 && isa_available(Isa::Neon)) isa = Isa::Neon;
  }
  return isa;
}

struct State {
  std::atomic<Isa> isa;
  std::atomic<const detail::KernelTable*> table;
  State() {
    Isa i = initial_isa();
    isa.store(i);
    table.store(table_for(i));
  }
};

State& state() {
  static State s;
  return s;
}

inline const detail::KernelTable& k() { return *state().table.load(std::memory_order_relaxed); }

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(RISKDIV_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(RISKDIV_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() {
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() { return state().isa.load(); }

void set_isa(Isa isa) {
  if (!isa_available(isa))
    throw Error(ErrorCode::ValidationError, std::string("instruction set not available: ") + isa_name(isa));
  state().table.store(table_for(isa));
  state().isa.store(isa);
}

void axpy(double* out, const double* src, double q, std::size_t n) { k().axpy(out, src, q, n); }

void scaled_argmin_update(double* best, std::int32_t* action, const double* g, double scale,
                          std::int32_t a, double rel_tol, std::size_t n) {
  k().scaled_argmin_update(best, action, g, scale, a, rel_tol, n);
}

void scaled_min_update(double* best, const double* g, double scale, std::size_t n) {
  k().scaled_min_update(best, g, scale, n);
}

void gather_lerp_accumulate(double* lo_acc, double* hi_acc, const double* lo, const double* hi,
                            const double* pad, const std::int32_t* idx, const double* w,
                            const double* lenv, const double* uenv, double q, std::size_t n) {
  k().gather_lerp_accumulate(lo_acc, hi_acc, lo, hi, pad, idx, w, lenv, uenv, q, n);
}

void argmax_update(double* best, std::int32_t* action, const double* cand, std::int32_t a,
                   double rel_tol, std::size_t n) {
  k().argmax_update(best, action, cand, a, rel_tol, n);
}

void max_update(double* best, const double* cand, std::size_t n) { k().max_update(best, cand, n); }

}  // namespace riskdiv::simd
