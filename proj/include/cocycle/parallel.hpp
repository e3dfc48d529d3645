#pragma once

#include <cstddef>
#include <functional>

namespace cocycle {

// Worker cap shared by every parallel loop; 0 means hardware concurrency.
void set_threads(int n);
int threads();

// Calls f(i) for i in [0, n). Work is split into contiguous chunks; callers
// write into slot i only, so results never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace cocycle
