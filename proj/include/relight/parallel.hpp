#pragma once

#include <functional>

namespace relight::parallel {

/// Worker count for every parallel region. 0 selects the hardware
/// concurrency; 1 forces sequential execution.
void set_thread_count(int count);
int thread_count() noexcept;

/// Calls body(begin, end) over disjoint contiguous row ranges covering
/// [0, rows). Small workloads run inline.
void for_rows(int rows, long long work_per_row, const std::function<void(int, int)>& body);

}  // namespace relight::parallel
