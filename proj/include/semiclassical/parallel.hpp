#pragma once

#include <cstddef>
#include <functional>

namespace semiclassical {

// Worker count used by node- and particle-parallel loops; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n) split into contiguous chunks. Each index is visited once,
// so results written per index are independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace semiclassical
