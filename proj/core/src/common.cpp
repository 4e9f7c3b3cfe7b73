#include "sft/common.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace sft {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads.load(); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& chunk_fn) {
  const int workers = std::min<std::int64_t>(thread_count(), std::max<std::int64_t>(n, 1));
  if (workers <= 1 || n < 2) {
    chunk_fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::int64_t per = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = w * per;
    const std::int64_t hi = std::min<std::int64_t>(lo + per, n);
    if (lo >= hi) break;
    pool.emplace_back([&chunk_fn, lo, hi] { chunk_fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

std::string version_string() { return "sftrack 0.1.0"; }

}  // namespace sft
