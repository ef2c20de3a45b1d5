#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace concavlab {

/// Error with a stable machine-readable code alongside the human message.
/// Codes are kebab-case, e.g. "point-outside-domain", "newton-divergence".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
  throw Error(code, message);
}

/// Resolves a thread-count request. CONCAVLAB_THREADS overrides the request;
/// a request of 0 falls back to the hardware concurrency.
inline int effective_threads(int requested) {
  if (const char* env = std::getenv("CONCAVLAB_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Chunked parallel loop over [0, n). fn(begin, end, chunk_index).
/// Chunk boundaries depend only on n and the thread count, so reductions
/// keyed by chunk_index stay deterministic regardless of scheduling.
inline void parallel_chunks(std::size_t n, int threads,
                            const std::function<void(std::size_t, std::size_t, int)>& fn) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n ? n : 1)));
  if (threads == 1 || n < 2) {
    if (n > 0) fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::size_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    std::size_t lo = static_cast<std::size_t>(t) * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=, &fn] { fn(lo, hi, t); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace concavlab
