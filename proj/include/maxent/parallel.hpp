#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace maxent {

/// Worker count from MAXENT_THREADS; 0 or unset means run on the caller's thread.
inline int thread_budget() {
  const char* env = std::getenv("MAXENT_THREADS");
  if (env == nullptr) return 0;
  try {
    return std::max(0, std::stoi(env));
  } catch (...) {
    return 0;
  }
}

/// Calls body(i) for i in [0, n). Each index is written by exactly one worker,
/// so callers that store per-index results and reduce afterwards stay
/// independent of the thread count.
template <class Body>
void parallel_for(long n, Body&& body, long min_chunk = 4096) {
  const int threads = thread_budget();
  if (threads <= 1 || n < 2 * min_chunk) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  const long workers = std::min<long>(threads, (n + min_chunk - 1) / min_chunk);
  const long chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (long w = 0; w < workers; ++w) {
    const long begin = w * chunk;
    const long end = std::min(n, begin + chunk);
    pool.emplace_back([begin, end, &body] {
      for (long i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace maxent
