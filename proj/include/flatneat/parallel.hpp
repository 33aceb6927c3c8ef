#pragma once

#include <condition_variable>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace flatneat {

// Fixed-size worker pool. Work items are closures; parallel_for below is the
// only pattern the library uses. Results never depend on worker count or
// scheduling: every task writes to slots it owns.
class ThreadPool {
 public:
  explicit ThreadPool(int threads) {
    threads = threads < 1 ? 1 : threads;
    workers_.reserve(std::size_t(threads));
    for (int i = 0; i < threads; ++i)
      workers_.emplace_back([this] { worker_loop(); });
  }

  ~ThreadPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int thread_count() const { return int(workers_.size()); }

  void submit(std::function<void()> task) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(task));
    }
    cv_.notify_one();
  }

 private:
  void worker_loop() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
        if (stop_ && queue_.empty()) return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      task();
    }
  }

  std::vector<std::thread> workers_;
  std::deque<std::function<void()>> queue_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stop_ = false;
};

// Runs body(begin, end) over [0, n) in chunks of at least `grain` items.
// Small inputs (or a null pool) run inline on the caller thread, which keeps
// tiny populations free of dispatch overhead. If any chunk throws, the
// exception from the lowest chunk index is rethrown after all chunks finish,
// so error reporting is scheduling-independent too.
inline void parallel_for(ThreadPool* pool, int n, int grain,
                         const std::function<void(int, int)>& body) {
  if (n <= 0) return;
  if (pool == nullptr || pool->thread_count() <= 1 || n <= grain) {
    body(0, n);
    return;
  }
  const int chunk = grain > 1 ? grain : 1;
  const int chunks = (n + chunk - 1) / chunk;

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
  std::mutex done_mutex;
  std::condition_variable done_cv;
  int remaining = chunks;

  for (int c = 0; c < chunks; ++c) {
    const int lo = c * chunk;
    const int hi = lo + chunk < n ? lo + chunk : n;
    pool->submit([&, c, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        errors[std::size_t(c)] = std::current_exception();
      }
      {
        std::lock_guard lock(done_mutex);
        --remaining;
      }
      done_cv.notify_one();
    });
  }

  std::unique_lock lock(done_mutex);
  done_cv.wait(lock, [&] { return remaining == 0; });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace flatneat
