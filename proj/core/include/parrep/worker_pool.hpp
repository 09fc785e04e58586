#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace parrep {

/// Persistent pool of worker threads executing index-parallel loops.
///
/// run(n, fn) calls fn(i) once for every i in [0, n) and blocks until all
/// calls finish (a barrier). Items are claimed from an atomic counter, so the
/// assignment of items to threads is schedule-dependent -- callers must make
/// fn(i) write only to slot i state so results do not depend on the pool
/// size. A pool of size 1 executes inline on the calling thread.
class WorkerPool {
public:
  explicit WorkerPool(unsigned n_threads = 1);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  unsigned size() const { return n_threads_; }

  void run(std::size_t n_items, const std::function<void(std::size_t)>& fn);

  /// Pool size from the PARREP_WORKERS environment variable (default 1).
  static unsigned env_size();

private:
  void worker_loop();

  unsigned n_threads_;
  std::vector<std::thread> threads_;

  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* fn_ = nullptr;
  std::size_t n_items_ = 0;
  std::atomic<std::size_t> next_{0};
  std::size_t generation_ = 0;
  unsigned busy_ = 0;
  bool stop_ = false;
};

} // namespace parrep
