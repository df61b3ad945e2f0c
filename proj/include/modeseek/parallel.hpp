#pragma once

#include <cstddef>
#include <functional>

namespace modeseek {

/// Worker count: MODESEEK_THREADS if set and positive, else hardware concurrency.
std::size_t max_threads();

/// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
/// write results into per-index slots so output does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace modeseek
