#pragma once

#include <cstddef>
#include <functional>

namespace flatm {

// Worker cap used by parallel_for. 0 resets to the hardware default.
void set_thread_count(unsigned threads);
unsigned thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks never
// overlap, so any body that writes only to its own indices produces the
// same bytes for every thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace flatm
