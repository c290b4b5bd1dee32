#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace clusterdist {

using Rng = std::mt19937_64;

/// Seed of an independent sub-stream identified by `path` under `base`.
/// The mapping goes through std::seed_seq, so it is fixed by the standard.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base,
                                        std::initializer_list<std::uint64_t> path);

[[nodiscard]] inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

/// Uniform draw on the open interval (0, 1).
[[nodiscard]] double uniform_open(Rng &rng);

/// Calls fn(i) for i in [0, n) on up to hardware_concurrency threads.
/// Callers write results by index, so output never depends on scheduling.
/// The first exception thrown by any task is rethrown after all threads join.
template <typename Fn> void parallel_for(std::size_t n, Fn &&fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1U, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error)
            error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error)
    std::rethrow_exception(error);
}

} // namespace clusterdist
