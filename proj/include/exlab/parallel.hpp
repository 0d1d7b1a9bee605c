#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace exlab {

struct ReplicaFailure {
  std::size_t replica = 0;
  std::string message;
};

class EnsembleError : public std::runtime_error {
 public:
  explicit EnsembleError(std::vector<ReplicaFailure> failures);
  const std::vector<ReplicaFailure>& failures() const { return failures_; }

 private:
  std::vector<ReplicaFailure> failures_;
};

unsigned resolve_threads(unsigned requested);

// Calls fn(i) for i in [0, n) on up to `threads` workers. Exceptions are
// collected per index, sorted by index, and returned.
template <class F>
std::vector<ReplicaFailure> parallel_for(std::size_t n, unsigned threads, F&& fn) {
  std::vector<ReplicaFailure> failures;
  std::mutex mu;
  auto run_one = [&](std::size_t i) {
    try {
      fn(i);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mu);
      failures.push_back({i, e.what()});
    }
  };
  threads = resolve_threads(threads);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(threads, n);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  std::sort(failures.begin(), failures.end(),
            [](const ReplicaFailure& a, const ReplicaFailure& b) { return a.replica < b.replica; });
  return failures;
}

// Ordered results; throws EnsembleError if any index failed.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, unsigned threads, F&& fn) {
  std::vector<T> out(n);
  auto failures = parallel_for(n, threads, [&](std::size_t i) { out[i] = fn(i); });
  if (!failures.empty()) throw EnsembleError(std::move(failures));
  return out;
}

}  // namespace exlab
