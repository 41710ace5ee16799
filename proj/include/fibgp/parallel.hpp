#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fibgp {

// Runs fn(i) for i in [0, n) across `jobs` threads on contiguous blocks.
// Callers store results by index and reduce sequentially, so output does not
// depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(jobs, n));
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t first = static_cast<std::size_t>(w) * chunk;
    const std::size_t last = std::min(n, first + chunk);
    if (first >= last) break;
    threads.emplace_back([first, last, &fn] {
      for (std::size_t i = first; i < last; ++i) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

inline unsigned hardware_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace fibgp
