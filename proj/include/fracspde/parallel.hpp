#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fracspde {

// Runs fn(i) for i in [0, n) on `workers` threads with a static block
// partition. Callers write results by index, so output never depends on the
// worker count.
template <class F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  const std::size_t w = static_cast<std::size_t>(std::max(1, workers));
  if (w == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < w; ++k) {
      pool.emplace_back([&, k] {
        try {
          for (std::size_t i = k * n / w; i < (k + 1) * n / w; ++i) fn(i);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fracspde
