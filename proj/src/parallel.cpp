#include "zsg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace zsg {

namespace {
std::atomic<int> g_max_workers{1};
}

int max_workers() { return g_max_workers.load(std::memory_order_relaxed); }

void set_max_workers(int n) {
  g_max_workers.store(std::max(1, n), std::memory_order_relaxed);
}

void parallel_for_workers(long n, int workers, const std::function<void(long, long)>& body) {
  if (n <= 0) return;
  workers = static_cast<int>(std::min<long>(workers, n));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  const long chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long begin = w * chunk;
    const long end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

void parallel_for(long n, const std::function<void(long, long)>& body) {
  parallel_for_workers(n, max_workers(), body);
}

}  // namespace zsg
