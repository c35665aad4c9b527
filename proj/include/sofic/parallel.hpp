#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sofic {

/// Upper bound on worker threads; 1 forces sequential execution.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(block, begin, end) over fixed-size blocks of [0, n).
///
/// Block boundaries depend only on n and block_size, never on the thread
/// count, so callers that reduce per-block results in block order get
/// bit-identical output for any number of threads.
template <typename Fn>
void for_each_block(std::size_t n, std::size_t block_size, Fn&& fn) {
  if (n == 0) return;
  block_size = std::max<std::size_t>(block_size, 1);
  const std::size_t blocks = (n + block_size - 1) / block_size;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(max_threads(), blocks));
  auto run = [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    fn(b, begin, std::min(n, begin + block_size));
  };
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t b = next++; b < blocks; b = next++) run(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = blocks;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::size_t block_count(std::size_t n, std::size_t block_size) {
  return n == 0 ? 0 : (n + block_size - 1) / block_size;
}

}  // namespace sofic
