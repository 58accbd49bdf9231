#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace xxz {

/// Worker count: XXZ_THREADS if set to a positive integer, else the hardware value.
inline unsigned thread_count() {
  if (const char* env = std::getenv("XXZ_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls f(lo, hi) on contiguous chunks of [begin, end). Runs inline when one
/// worker suffices.
template <class F>
void parallel_chunks(std::size_t begin, std::size_t end, F&& f,
                     unsigned workers = thread_count()) {
  const std::size_t n = end > begin ? end - begin : 0;
  if (workers <= 1 || n < 2) {
    if (n) f(begin, end);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  const std::size_t step = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    std::size_t slot = 0;
    for (std::size_t lo = begin; lo < end; lo += step, ++slot) {
      const std::size_t hi = std::min(end, lo + step);
      pool.emplace_back([&f, &errors, slot, lo, hi] {
        try {
          f(lo, hi);
        } catch (...) {
          errors[slot] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Applies f to every index in [0, n) and collects results in index order.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F&& f, unsigned workers = thread_count()) {
  std::vector<std::optional<R>> slots(n);
  parallel_chunks(0, n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) slots[i].emplace(f(i));
  }, workers);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace xxz
