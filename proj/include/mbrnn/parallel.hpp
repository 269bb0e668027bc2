#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace mbrnn {

// Minimal fork-join pool. The CLI owns one instance sized by --threads and
// passes it down; a null pool means run serially. Work items are indexed, and
// callers that need determinism write into pre-sized slots by index and reduce
// in index order afterwards.
class ThreadPool {
 public:
  explicit ThreadPool(unsigned threads) : threads_(threads == 0 ? 1 : threads) {}

  unsigned size() const { return threads_; }

  // Runs fn(i) for i in [0, n) across the pool; blocks until done.
  void for_each(std::size_t n, const std::function<void(std::size_t)>& fn) const {
    if (n == 0) return;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads_, n));
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

 private:
  unsigned threads_;
};

inline void parallel_for(const ThreadPool* pool, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (pool != nullptr && pool->size() > 1) {
    pool->for_each(n, fn);
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace mbrnn
