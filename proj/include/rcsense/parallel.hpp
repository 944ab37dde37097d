#pragma once

// Fixed-size worker pool over an index range. Results are handed to the
// consumer strictly in index order, so output never depends on the number
// of workers.

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace rcsense {

/// Runs produce(i) for i in [0, n) on `jobs` threads and calls consume(i, r)
/// on the calling thread in increasing i. The first exception (by index) is
/// rethrown after the workers stop.
template <class R>
void ordered_parallel(std::size_t n, std::size_t jobs,
                      const std::function<R(std::size_t)>& produce,
                      const std::function<void(std::size_t, R&&)>& consume) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<char> done(n, 0);
  std::mutex m;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      std::optional<R> r;
      std::exception_ptr err;
      try {
        r.emplace(produce(i));
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard<std::mutex> lock(m);
        slots[i] = std::move(r);
        errors[i] = err;
        done[i] = 1;
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  if (jobs > 1) {
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  std::exception_ptr failure;
  for (std::size_t i = 0; i < n && !failure; ++i) {
    if (jobs == 1) {
      try {
        R r = produce(i);
        consume(i, std::move(r));
      } catch (...) {
        failure = std::current_exception();
      }
      continue;
    }
    std::optional<R> r;
    {
      std::unique_lock<std::mutex> lock(m);
      cv.wait(lock, [&] { return done[i] != 0; });
      if (errors[i]) {
        failure = errors[i];
        break;
      }
      r = std::move(slots[i]);
      slots[i].reset();
    }
    try {
      consume(i, std::move(*r));
    } catch (...) {
      failure = std::current_exception();
    }
  }
  stop.store(true);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace rcsense
