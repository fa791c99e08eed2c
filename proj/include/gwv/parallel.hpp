#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace gwv {

// Thread count: GWV_THREADS env var if set, else hardware concurrency.
inline int thread_count() {
  static int n = [] {
    if (const char* env = std::getenv("GWV_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
  }();
  return n;
}

// Chunked index-parallel loop. Each index writes only its own slots, so the
// result is identical for any thread count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int nt = thread_count();
  if (nt <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t chunk = (n + nt - 1) / nt;
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    std::size_t b = t * chunk;
    std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] {
      for (std::size_t i = b; i < e; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace gwv
