#pragma once

// Minimal fork-join helper. Work is split into caller-defined chunks whose
// results the caller reduces in chunk order, so outputs never depend on the
// number of threads.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nanode {

/// NANODE_THREADS when set to a positive integer, otherwise the hardware
/// concurrency (at least 1).
std::size_t thread_budget();

/// Calls fn(i) for every i in [0, count) on up to `threads` threads. The
/// exception of the lowest failing index is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t worker) {
    for (std::size_t i = worker; i < count; i += threads) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace nanode
