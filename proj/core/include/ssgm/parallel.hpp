#pragma once

#include <cstddef>
#include <functional>

namespace ssgm {

/// Worker cap for parallel loops. Defaults to SSGM_THREADS when set,
/// otherwise std::thread::hardware_concurrency().
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks write
/// disjoint outputs, so results never depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise (tree) summation with a fixed split order.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace ssgm
