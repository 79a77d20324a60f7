#include "taskrt/ready_pool.hpp"

#include <stdexcept>

namespace taskrt {

ReadyPool::ReadyPool(std::size_t num_threads) {
  if (num_threads == 0) throw std::invalid_argument("ReadyPool needs at least one queue");
  queues_.reserve(num_threads);
  for (std::size_t i = 0; i < num_threads; ++i) queues_.push_back(std::make_unique<Queue>());
}

void ReadyPool::push(std::size_t owner, TaskDescriptor* task) {
  Queue& q = *queues_[owner];
  std::lock_guard guard(q.lock);
  q.tasks.push_back(task);
  size_.fetch_add(1, std::memory_order_release);
}

TaskDescriptor* ReadyPool::pop(std::size_t owner) {
  Queue& q = *queues_[owner];
  std::lock_guard guard(q.lock);
  if (q.tasks.empty()) return nullptr;
  TaskDescriptor* t = q.tasks.back();
  q.tasks.pop_back();
  size_.fetch_sub(1, std::memory_order_release);
  return t;
}

TaskDescriptor* ReadyPool::steal_from(std::size_t victim) {
  Queue& q = *queues_[victim];
  if (!q.lock.try_lock()) return nullptr;
  std::lock_guard guard(q.lock, std::adopt_lock);
  if (q.tasks.empty()) return nullptr;
  TaskDescriptor* t = q.tasks.front();
  q.tasks.pop_front();
  size_.fetch_sub(1, std::memory_order_release);
  return t;
}

TaskDescriptor* ReadyPool::steal(std::size_t thief) {
  const std::size_t n = queues_.size();
  for (std::size_t k = 1; k < n; ++k) {
    if (TaskDescriptor* t = steal_from((thief + k) % n)) return t;
  }
  return nullptr;
}

std::size_t ReadyPool::size_of(std::size_t owner) const {
  const Queue& q = *queues_[owner];
  std::lock_guard guard(q.lock);
  return q.tasks.size();
}

}  // namespace taskrt
