#pragma once

#include <cstddef>
#include <functional>

namespace vortmod {

// Process-wide worker count for data-parallel loops. 0 selects the hardware count.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs fn(begin, end) over a static partition of [0, n) into contiguous
// chunks whose boundaries are multiples of `grain`. The partition depends
// only on n, grain and the thread count.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace vortmod
