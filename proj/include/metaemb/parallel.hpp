#ifndef METAEMB_PARALLEL_HPP
#define METAEMB_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace metaemb {

inline unsigned default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Calls fn(begin, end) over contiguous ranges covering [0, n). Ranges are
/// disjoint, so callers writing results by index get output independent of
/// the thread count. The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  threads = std::max(1u, threads);
  const std::size_t workers = std::min<std::size_t>(threads, n);
  if (workers == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t step = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = w * step;
      const std::size_t e = std::min(n, b + step);
      if (b >= e) break;
      pool.emplace_back([&, b, e] {
        try {
          fn(b, e);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace metaemb

#endif  // METAEMB_PARALLEL_HPP
