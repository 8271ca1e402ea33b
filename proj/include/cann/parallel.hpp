#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cann {

/// Fixed set of worker threads running index-parallel loops. Each index is
/// handled exactly once; callers write results into per-index slots, so the
/// outcome does not depend on scheduling.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t workers() const noexcept { return threads_.size() + 1; }

  /// Runs fn(i) for i in [0, n). The calling thread takes part. The first
  /// exception thrown by fn is rethrown here after the loop drains.
  void for_each(std::size_t n, const std::function<void(std::size_t)>& fn);

 private:
  void worker_loop();
  void drain();

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t job_size_ = 0;
  std::size_t next_ = 0;
  std::size_t finished_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

/// Hardware concurrency, at least 1.
std::size_t default_workers();

}  // namespace cann
