#pragma once

#include <cstddef>
#include <functional>

namespace kswap {

// Worker count used by parallel sections: an explicit override if set, else
// KSWAP_WORKERS, else hardware concurrency.
std::size_t worker_count();
void set_worker_count(std::size_t workers);  // 0 restores the default

// Runs fn(i) for i in [0, n). Callers write results into pre-sized slots so
// the outcome does not depend on scheduling. If several iterations throw, the
// exception of the lowest index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace kswap
