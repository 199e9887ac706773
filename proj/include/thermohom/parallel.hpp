#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace thermohom {

// Process-wide worker count used by every parallel loop. Results never depend
// on it: loops only write per-index slots and reductions run in fixed order.
void set_worker_count(int workers);
int worker_count();

// Calls fn(i) for i in [0, n), statically chunked over the workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Same, but fn receives contiguous [begin, end) ranges.
void parallel_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Blocked summation with a fixed block size, independent of the worker count.
double deterministic_dot(std::span<const double> a, std::span<const double> b);
double deterministic_sum(std::span<const double> a);

}  // namespace thermohom
