#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace exlab {

/// Worker count used by all Monte Carlo loops. 0 selects
/// std::thread::hardware_concurrency(). Results never depend on this value:
/// work is split into fixed chunks, each with its own RNG stream, and
/// chunk results are reduced in chunk order.
void set_threads(unsigned n);
unsigned threads();

/// Evaluates fn(chunk) for chunk in [0, n_chunks) on the worker pool and
/// returns the results indexed by chunk.
template <class Fn>
auto map_chunks(std::size_t n_chunks, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> out(n_chunks);
  const unsigned workers = std::min<std::size_t>(threads(), n_chunks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_chunks; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_chunks) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Splits n items into chunks of `chunk_size` and calls fn(chunk, begin, end).
template <class Fn>
auto map_ranges(std::size_t n, std::size_t chunk_size, Fn&& fn) {
  const std::size_t n_chunks = n == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
  return map_chunks(n_chunks, [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    const std::size_t end = std::min(n, begin + chunk_size);
    return fn(c, begin, end);
  });
}

}  // namespace exlab
