#pragma once

#include <cstddef>
#include <functional>

namespace monotest {

// Worker count resolution: explicit request > MONOTEST_THREADS > hardware.
int resolve_thread_count(int requested = 0);

// Runs body(i) for i in [0, n). Work items must write only to their own
// slots; iteration order is unspecified but results must not depend on it.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace monotest
