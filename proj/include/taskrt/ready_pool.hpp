#pragma once

#include <atomic>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <vector>

#include "taskrt/spinlock.hpp"

namespace taskrt {

class TaskDescriptor;

// Distributed breadth-first ready pool: one deque per thread. The owner
// pushes and pops at the back; thieves take one task from the front.
class ReadyPool {
 public:
  explicit ReadyPool(std::size_t num_threads);

  void push(std::size_t owner, TaskDescriptor* task);
  TaskDescriptor* pop(std::size_t owner);
  TaskDescriptor* steal_from(std::size_t victim);
  // One sweep over all other deques starting at thief + 1.
  TaskDescriptor* steal(std::size_t thief);

  std::size_t size() const noexcept { return size_.load(std::memory_order_acquire); }
  std::size_t size_of(std::size_t owner) const;
  std::size_t num_queues() const noexcept { return queues_.size(); }

 private:
  struct alignas(64) Queue {
    mutable SpinLock lock;
    std::deque<TaskDescriptor*> tasks;
  };

  std::vector<std::unique_ptr<Queue>> queues_;
  std::atomic<std::size_t> size_{0};
};

}  // namespace taskrt
