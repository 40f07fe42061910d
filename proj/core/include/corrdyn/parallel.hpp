#pragma once

#include <cstddef>
#include <functional>

namespace corrdyn {

// Worker count: CORRDYN_THREADS when set to a positive integer, otherwise the
// number of CPUs this process may run on (at least 1).
int thread_count();

// Calls body(i) for i in [0, n) on up to thread_count() threads.  Callers
// write results into slot i so the outcome does not depend on scheduling.
// An exception is rethrown after all workers join; with several failures the
// one a sequential loop would hit first is chosen.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace corrdyn
