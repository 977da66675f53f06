#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ssa {

/// Calls body(index, worker) for every index in [0, count) on up to `workers`
/// threads. Indices are handed out dynamically, so body must only write to
/// per-index or per-worker state. The first exception is rethrown after all
/// threads finish.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t, int)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  const int used = static_cast<int>(std::min<std::size_t>(count, static_cast<std::size_t>(workers)));
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (int w = 0; w < used; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i, w);
        } catch (...) {
          std::lock_guard<std::mutex> g(error_lock);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ssa
