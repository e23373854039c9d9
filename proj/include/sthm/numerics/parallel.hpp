#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sthm {

// Calls fn(b) for every block b in [0, nblocks) on up to `workers` threads.
// Each block must write only its own output slots; the first failing block (lowest index) rethrows.
template <class Fn>
void for_each_block(std::size_t nblocks, int workers, Fn&& fn) {
  const std::size_t nthreads = std::min<std::size_t>(std::max(1, workers), nblocks);
  if (nthreads <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_block = nblocks;
  std::exception_ptr failure;
  auto body = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      try {
        fn(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (b < failed_block) {
          failed_block = b;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sthm
