#include "relight/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace relight::parallel {

namespace {

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::atomic<int> g_threads{hardware_threads()};

// Below this many sample updates per call, thread start-up dominates.
constexpr long long kMinParallelWork = 1 << 16;

}  // namespace

void set_thread_count(int count) { g_threads = count <= 0 ? hardware_threads() : count; }

int thread_count() noexcept { return g_threads; }

void for_rows(int rows, long long work_per_row, const std::function<void(int, int)>& body) {
  const int workers = std::min(thread_count(), rows);
  if (workers <= 1 || rows * work_per_row < kMinParallelWork) {
    body(0, rows);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const int chunk = (rows + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(body, begin, end);
  }
  body(0, std::min(rows, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace relight::parallel
