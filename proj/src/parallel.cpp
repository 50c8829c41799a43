#include "riskdiv/parallel.hpp"

#include <omp.h>

#include <atomic>

namespace riskdiv {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() {
  int n = g_threads.load();
  return n > 0 ? n : omp_get_max_threads();
}

}  // namespace riskdiv
