// Deterministic work partitioning: a fixed contiguous split of the index
// range per worker, so results do not depend on scheduling order. The worker
// count comes from MICROLOC_THREADS when set, else the hardware count.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace microloc {

inline int worker_count() {
  if (const char* env = std::getenv("MICROLOC_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs body(i) for i in [0, n). Each worker owns one contiguous index block;
// the first exception thrown by any worker is rethrown on the caller.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
  if (n <= 0) return;
  const int workers = worker_count();
  if (workers == 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  const int used = static_cast<int>(std::min<std::int64_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(used);
  std::vector<std::exception_ptr> errors(used);
  const std::int64_t base = n / used;
  const std::int64_t extra = n % used;
  std::int64_t begin = 0;
  for (int w = 0; w < used; ++w) {
    const std::int64_t len = base + (w < extra ? 1 : 0);
    const std::int64_t end = begin + len;
    pool.emplace_back([&body, &errors, w, begin, end] {
      try {
        for (std::int64_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace microloc
