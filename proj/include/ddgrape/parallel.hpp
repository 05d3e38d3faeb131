#pragma once

#include <cstddef>
#include <functional>

namespace ddgrape {

/// Worker bound from DDGRAPE_THREADS (0 or unset = hardware concurrency).
unsigned worker_count();

/// Runs body(i) for i in [0, count). Each index must write only its own
/// output slot; callers reduce afterwards in index order.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace ddgrape
