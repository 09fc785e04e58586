#include "parrep/worker_pool.hpp"

#include <cstdlib>

#include "parrep/errors.hpp"

namespace parrep {

WorkerPool::WorkerPool(unsigned n_threads) : n_threads_(n_threads) {
  if (n_threads_ == 0) throw ConfigError("worker pool size must be >= 1");
  // thread 0 is the calling thread; spawn the rest
  threads_.reserve(n_threads_ - 1);
  for (unsigned t = 1; t < n_threads_; ++t)
    threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (std::thread& t : threads_) t.join();
}

void WorkerPool::run(std::size_t n_items,
                     const std::function<void(std::size_t)>& fn) {
  if (n_items == 0) return;
  if (n_threads_ == 1 || n_items == 1) {
    for (std::size_t i = 0; i < n_items; ++i) fn(i);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    fn_ = &fn;
    n_items_ = n_items;
    next_.store(0, std::memory_order_relaxed);
    busy_ = n_threads_ - 1;
    ++generation_;
  }
  start_cv_.notify_all();
  // the calling thread participates
  for (;;) {
    const std::size_t i = next_.fetch_add(1, std::memory_order_relaxed);
    if (i >= n_items) break;
    fn(i);
  }
  std::unique_lock lock(mutex_);
  done_cv_.wait(lock, [this] { return busy_ == 0; });
  fn_ = nullptr;
}

void WorkerPool::worker_loop() {
  std::size_t seen = 0;
  for (;;) {
    const std::function<void(std::size_t)>* fn = nullptr;
    std::size_t n = 0;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      fn = fn_;
      n = n_items_;
    }
    for (;;) {
      const std::size_t i = next_.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) break;
      (*fn)(i);
    }
    {
      std::lock_guard lock(mutex_);
      --busy_;
    }
    done_cv_.notify_one();
  }
}

unsigned WorkerPool::env_size() {
  const char* v = std::getenv("PARREP_WORKERS");
  if (v == nullptr || *v == '\0') return 1;
  const long n = std::strtol(v, nullptr, 10);
  if (n < 1) return 1;
  return static_cast<unsigned>(n);
}

} // namespace parrep
