#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tslab {

// Raised for malformed configuration (bad exponent ranges, misaligned grids,
// unreadable files).  The CLI maps this to exit code 1; hard numerical
// assertion failures map to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline int worker_count() {
  if (const char* env = std::getenv("TSLAB_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, n) into contiguous chunks, one worker thread each.  Results must
// be written to preassigned slots; reductions happen afterwards in index
// order, so values are independent of the thread count.
template <class Fn>
void parallel_for(std::int64_t n, Fn&& fn, int threads = 0) {
  if (threads <= 0) threads = worker_count();
  if (threads == 1 || n < 128) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (threads > n) threads = static_cast<int>(n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    std::int64_t lo = n * w / threads;
    std::int64_t hi = n * (w + 1) / threads;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// 17 significant digits: enough to round-trip an IEEE double exactly.
inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace tslab
