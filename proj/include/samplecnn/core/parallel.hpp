#ifndef SAMPLECNN_CORE_PARALLEL_HPP
#define SAMPLECNN_CORE_PARALLEL_HPP

#include <algorithm>
#include <thread>
#include <vector>

namespace samplecnn {

/// Runs fn(i) for i in [0, n). With threads <= 1 this is a plain loop.
/// Callers that need reproducible reductions must write into per-index
/// slots and combine them in index order afterwards.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (n <= 0) return;
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([=]() {
      for (int i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

} // namespace samplecnn

#endif
