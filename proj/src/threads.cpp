#include "mln/threads.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace mln {

int thread_count() {
  static const int cached = [] {
    const char* env = std::getenv("MLN_THREADS");
    int want = 1;
    if (env && *env) want = std::atoi(env);
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    return std::clamp(want, 1, hw);
  }();
  return cached;
}

void parallel_for(std::size_t count, void (*body)(std::size_t, void*), void* ctx) {
  const int nt = thread_count();
  if (nt <= 1 || count < 4096) {
    for (std::size_t i = 0; i < count; ++i) body(i, ctx);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (count + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=] {
      for (std::size_t i = lo; i < hi; ++i) body(i, ctx);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mln
