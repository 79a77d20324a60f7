#pragma once

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "taskrt/clause.hpp"
#include "taskrt/spinlock.hpp"

namespace taskrt {

class TaskDescriptor;

// True when both clauses name the same datum and at least one writes it.
constexpr bool conflict(const DependenceClause& a, const DependenceClause& b) noexcept {
  return a.token == b.token && (writes(a.direction) || writes(b.direction));
}

struct TokenEntry {
  TaskDescriptor* last_writer = nullptr;
  std::vector<TaskDescriptor*> readers_since_write;

  bool empty() const noexcept { return last_writer == nullptr && readers_since_write.empty(); }
};

struct SubmitResult {
  bool ready = false;
  std::size_t pending = 0;
};

// Dependence graph among the children of one task. Edges are RAW, WAR and
// WAW orderings between siblings, derived per token in submission order.
//
// All mutating calls require the caller to hold the graph lock
// (lock()/unlock(), so std::lock_guard works).
class TaskGraph {
 public:
  TaskGraph() = default;
  TaskGraph(const TaskGraph&) = delete;
  TaskGraph& operator=(const TaskGraph&) = delete;

  void lock() noexcept { lock_.lock(); }
  bool try_lock() noexcept { return lock_.try_lock(); }
  void unlock() noexcept { lock_.unlock(); }

  // Registers a SUBMITTED task. The task ends IN_GRAPH, or READY when no
  // live sibling precedes it.
  SubmitResult submit(TaskDescriptor& task);

  // Removes a FINISHED task, moving it to RELEASED. Successors whose last
  // predecessor was `task` become READY and are appended to `ready_out`.
  void release(TaskDescriptor& task, std::vector<TaskDescriptor*>& ready_out);

  std::vector<TaskDescriptor*> release(TaskDescriptor& task) {
    std::vector<TaskDescriptor*> ready;
    release(task, ready);
    return ready;
  }

  std::size_t in_graph_count() const noexcept { return in_graph_count_; }
  std::size_t token_count() const noexcept { return entries_.size(); }
  const TokenEntry* find(Token token) const;

 private:
  SpinLock lock_;
  std::unordered_map<Token, TokenEntry> entries_;
  std::size_t in_graph_count_ = 0;
  std::vector<TaskDescriptor*> scratch_;
};

}  // namespace taskrt
