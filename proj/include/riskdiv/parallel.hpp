#pragma once

namespace riskdiv {

// Upper bound on worker threads used by the solvers and the simulator.
// 0 means the OpenMP default. Results never depend on this value.
void set_thread_count(int n);
int thread_count();

}  // namespace riskdiv
