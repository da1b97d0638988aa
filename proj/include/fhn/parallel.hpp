#pragma once

#include <cstddef>
#include <functional>

namespace fhn {

/// Calls fn(i) for every i in [0, n) on up to `workers` threads (0 means
/// hardware concurrency). Each call must write only to storage owned by its
/// index, which keeps results independent of scheduling. If any call
/// throws, the exception from the lowest failing index is rethrown after
/// all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned workers = 0);

}  // namespace fhn
