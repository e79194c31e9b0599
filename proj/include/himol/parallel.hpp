#pragma once
#include <cstddef>
#include <functional>

namespace himol {

// Worker cap used by every parallel loop; 0 means hardware concurrency.
void set_max_jobs(unsigned jobs);
unsigned max_jobs();

// Runs body(i) for i in [0, n) on up to max_jobs() threads. Each index is
// visited exactly once; callers write results into per-index slots so the
// outcome does not depend on scheduling. Calls made from inside a body run
// serially. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace himol
