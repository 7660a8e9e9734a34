#pragma once

#include <cstddef>
#include <functional>

namespace ecap {

/// Worker count used when a call does not pass one explicitly.
/// Initialized from ECAP_THREADS, else std::thread::hardware_concurrency().
int default_threads();
void set_default_threads(int n);

/// Runs body(i) for i in [0, n) on `threads` workers (0 = default_threads()).
/// Items are claimed dynamically, so body must not depend on which worker runs it.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace ecap
