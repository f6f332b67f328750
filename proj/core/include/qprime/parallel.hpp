#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qprime {

// Chunked parallel map over [0, n); results land in index order so any later
// reduction is independent of the thread count. Exceptions are rethrown on
// the calling thread.
template <typename T>
std::vector<T> parallel_map(int n, int threads,
                            const std::function<T(int)>& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  std::vector<T> out(n);
  if (threads == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mtx;
  auto worker = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mtx);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

// Pairwise (tree) sum in fixed index order; deterministic and rounding-stable.
inline double pairwise_sum(std::vector<double> v) {
  int n = static_cast<int>(v.size());
  if (n == 0) return 0.0;
  while (n > 1) {
    int half = n / 2;
    for (int i = 0; i < half; ++i) v[i] = v[2 * i] + v[2 * i + 1];
    if (n & 1) {
      v[half] = v[n - 1];
      ++half;
    }
    n = half;
  }
  return v[0];
}

}  // namespace qprime
