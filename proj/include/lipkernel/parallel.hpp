#pragma once

#include "lipkernel/types.hpp"

#include <functional>

namespace lipkernel {

// Global cap on worker threads. 0 restores the hardware default.
void set_thread_cap(int n);
int thread_cap();

// Calls body(i) for i in [0, n). Iterations must be independent; results are
// identical for any thread count as long as body writes only slot i.
void parallel_for(Index n, const std::function<void(Index)>& body);

}  // namespace lipkernel
