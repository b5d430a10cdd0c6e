#pragma once

#include <cstddef>
#include <functional>

namespace mixsei::detail {

// Worker count for parallel sections: MIXSEI_THREADS when set (clamped to
// >= 1), otherwise the hardware concurrency.
std::size_t worker_count();

// Run fn(i) for i in [0, n). Work is split into contiguous index ranges,
// one per worker; fn must only touch state owned by index i so the result
// is identical for any worker count. Falls back to a plain loop when one
// worker suffices.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mixsei::detail
