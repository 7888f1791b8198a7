#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rt {

// Runs fn(0..n-1) over `workers` threads (serial when workers <= 1). Each index
// must write only its own output slot, so the result is independent of the
// worker count and of execution order.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nw = std::min(workers, n);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(nw);
  threads.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    threads.emplace_back([&, w]() {
      try {
        for (int i = w; i < n; i += nw) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rt
