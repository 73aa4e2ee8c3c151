#pragma once

#include <cstddef>
#include <functional>

namespace fmkdv {

// Worker count: hardware concurrency, capped by QD_THREADS when set.
unsigned thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() threads. Exceptions are
// rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fmkdv
