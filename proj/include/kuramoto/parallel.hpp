#pragma once

#include <cstddef>
#include <functional>

namespace kuramoto {

// Worker count from KURAMOTO_THREADS (default 1). Read once per process.
std::size_t thread_count();

// Calls body(i) for i in [0, n). Indices are split into contiguous blocks, one
// per worker; the call returns after every index is done. The first exception
// thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace kuramoto
