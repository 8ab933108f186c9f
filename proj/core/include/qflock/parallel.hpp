#ifndef QFLOCK_PARALLEL_HPP
#define QFLOCK_PARALLEL_HPP

#include <cstddef>
#include <thread>
#include <vector>

namespace qflock {

/// Chunked parallel loop over [0, n). Each index is processed exactly once;
/// with threads <= 1 the loop runs inline. Work must be independent per
/// index (the simulators write each particle/cell exactly once).
template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t nt = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body]() {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace qflock

#endif  // QFLOCK_PARALLEL_HPP
