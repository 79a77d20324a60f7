#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taskrt/clause.hpp"
#include "taskrt/task_graph.hpp"

namespace taskrt {

enum class TaskState : std::uint8_t {
  Created,
  Submitted,
  InGraph,
  Ready,
  Running,
  Blocked,
  Finished,
  Released,
  Deletable,
};

enum class TaskEvent : std::uint8_t {
  Submit,
  EnterGraph,
  BecomeReady,
  Start,
  Block,
  Unblock,
  Finish,
  Release,
  LastChildGone,
};

std::string_view to_string(TaskState s) noexcept;
std::string_view to_string(TaskEvent e) noexcept;

// Returns the successor state, or false if `event` is not legal in `from`.
bool next_state(TaskState from, TaskEvent event, TaskState& to) noexcept;

class IllegalTransition : public std::logic_error {
 public:
  IllegalTransition(TaskState from, TaskEvent event);

  TaskState from() const noexcept { return from_; }
  TaskEvent event() const noexcept { return event_; }

 private:
  TaskState from_;
  TaskEvent event_;
};

class TaskDescriptor;

// Intrusive strong reference. Every descriptor starts with one reference
// owned by the runtime ("life" reference), dropped by the try_delete winner.
class TaskRef {
 public:
  TaskRef() = default;
  explicit TaskRef(TaskDescriptor* task) noexcept;
  TaskRef(const TaskRef& other) noexcept : TaskRef(other.task_) {}
  TaskRef(TaskRef&& other) noexcept : task_(std::exchange(other.task_, nullptr)) {}
  TaskRef& operator=(TaskRef other) noexcept {
    std::swap(task_, other.task_);
    return *this;
  }
  ~TaskRef();

  // Takes over an existing reference (such as the life reference of a
  // fresh descriptor) without adding one.
  static TaskRef adopt(TaskDescriptor* task) noexcept {
    TaskRef r;
    r.task_ = task;
    return r;
  }

  TaskDescriptor* get() const noexcept { return task_; }
  TaskDescriptor* operator->() const noexcept { return task_; }
  TaskDescriptor& operator*() const noexcept { return *task_; }
  explicit operator bool() const noexcept { return task_ != nullptr; }
  void reset() noexcept { TaskRef().swap(*this); }
  void swap(TaskRef& other) noexcept { std::swap(task_, other.task_); }

 private:
  TaskDescriptor* task_ = nullptr;
};

using TaskHandle = TaskRef;

// One per task. Mutable shared fields (state, child and predecessor counts,
// reference count) are atomics; everything else is fixed before the task is
// handed to the dependence graph. `successors` is guarded by the lock of
// the parent's graph.
class TaskDescriptor {
 public:
  using Body = std::function<void()>;

  // Allocates a descriptor holding one life reference and, when `parent` is
  // set, a reference on the parent that is dropped on destruction.
  static TaskDescriptor* create(std::uint64_t id, Body body, std::vector<DependenceClause> clauses,
                                TaskDescriptor* parent = nullptr, std::string_view label = {});

  // A descriptor standing for the implicit task of the main thread: RUNNING
  // from the start, never deleted through the life cycle.
  static TaskDescriptor* create_root();

  TaskDescriptor(const TaskDescriptor&) = delete;
  TaskDescriptor& operator=(const TaskDescriptor&) = delete;

  std::uint64_t id() const noexcept { return id_; }
  std::string_view label() const noexcept { return label_; }
  const std::vector<DependenceClause>& clauses() const noexcept { return clauses_; }
  TaskDescriptor* parent() const noexcept { return parent_; }

  // Graph holding this task's children. Allocated on first use by the
  // thread running this task.
  TaskGraph& children_graph() {
    if (!children_) children_ = std::make_unique<TaskGraph>();
    return *children_;
  }
  // Graph this task is registered in (its parent's).
  TaskGraph& graph() const noexcept { return *parent_->children_; }

  TaskState state() const noexcept { return state_.load(std::memory_order_acquire); }
  std::int64_t live_children() const noexcept {
    return live_children_.load(std::memory_order_acquire);
  }
  std::int64_t pending_predecessors() const noexcept {
    return pending_.load(std::memory_order_acquire);
  }

  void run_body();
  void drop_body() noexcept { body_ = nullptr; }

  std::uint64_t creation_seq = 0;
  std::size_t creator = 0;
  // Global order in which the task entered its graph (set by the runtime).
  std::uint64_t submit_stamp = 0;

 private:
  TaskDescriptor(std::uint64_t id, Body body, std::vector<DependenceClause> clauses,
                 TaskDescriptor* parent, std::string_view label);
  ~TaskDescriptor();

  friend class TaskRef;
  friend class TaskGraph;
  friend TaskState transition(TaskDescriptor&, TaskEvent);
  friend bool try_delete(TaskDescriptor&);
  friend void attach_child(TaskDescriptor&) noexcept;
  friend bool detach_child(TaskDescriptor&) noexcept;

  void retain() noexcept { refs_.fetch_add(1, std::memory_order_relaxed); }
  void release_ref() noexcept;

  std::uint64_t id_;
  Body body_;
  std::vector<DependenceClause> clauses_;
  TaskDescriptor* parent_;
  std::string label_;

  std::atomic<TaskState> state_{TaskState::Created};
  std::atomic<std::int64_t> live_children_{0};
  std::atomic<std::int64_t> pending_{0};
  std::atomic<std::uint32_t> refs_{1};

  std::vector<TaskDescriptor*> successors_;
  std::unique_ptr<TaskGraph> children_;
};

// Applies `event` atomically. Throws IllegalTransition when the edge is not
// in the life-cycle table.
TaskState transition(TaskDescriptor& task, TaskEvent event);

// Exactly one caller ever gets true for a given task: the one that observes
// RELEASED with no live children and wins the RELEASED -> DELETABLE edge.
// The winner's call drops the life reference.
bool try_delete(TaskDescriptor& task);

// Child bookkeeping on the parent. detach_child returns true when it
// removed the last live child.
void attach_child(TaskDescriptor& parent) noexcept;
bool detach_child(TaskDescriptor& parent) noexcept;

}  // namespace taskrt
