#ifndef SELECTORLAB_PARALLEL_HPP
#define SELECTORLAB_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace selectorlab {

/// Worker cap: SELECTOR_LAB_THREADS if set and positive, else hardware concurrency.
std::size_t max_threads();

/// Runs body(i) for i in [0, n). Each index runs exactly once; callers write
/// results into per-index slots so the outcome does not depend on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace selectorlab

#endif
