#pragma once

#include <cstddef>
#include <functional>

namespace drama {

/// Global worker cap (the CLI's --threads). Defaults to 1.
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Runs fn(i) for i in [0, n) on up to max_threads() workers. Callers write
/// results into slot i, so output order never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace drama
