#pragma once

#include <cstddef>
#include <functional>

namespace wibg {

/// Worker count: WIBG_WORKERS if set to a positive integer, else the hardware concurrency.
int worker_count();

/// Calls body(i) for i in [0, n) on worker_count() threads. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wibg
