#pragma once

#include <cstddef>
#include <functional>

namespace wonham {

// Worker count used when a caller passes 0. Reads WONHAM_THREADS once,
// otherwise falls back to hardware concurrency.
std::size_t default_workers();
void set_default_workers(std::size_t n);

// Runs body(i) for i in [0, n) on up to `workers` threads (0 = default).
// Work is handed out dynamically; callers write results into per-index slots
// and reduce afterwards in index order. An exception from a body stops the
// hand-out; the one with the lowest index seen is rethrown after joining.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace wonham
