#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tcn {

// Worker cap: TCN_MAX_WORKERS if set and positive, else the hardware concurrency.
inline int max_workers() {
  if (const char* env = std::getenv("TCN_MAX_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Each call must write only its own output slot so the
// result does not depend on scheduling. The first exception is rethrown.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(max_workers(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace tcn
