#include "taskrt/task.hpp"

#include <algorithm>
#include <cassert>
#include <string>

namespace taskrt {

std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::In: return "IN";
    case Direction::Out: return "OUT";
    case Direction::InOut: return "INOUT";
  }
  return "?";
}

std::vector<DependenceClause> merge_clauses(std::vector<DependenceClause> clauses) {
  std::vector<DependenceClause> merged;
  merged.reserve(clauses.size());
  for (const auto& c : clauses) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const DependenceClause& m) { return m.token == c.token; });
    if (it == merged.end()) {
      merged.push_back(c);
    } else {
      it->direction = join(it->direction, c.direction);
    }
  }
  return merged;
}

std::string_view to_string(TaskState s) noexcept {
  switch (s) {
    case TaskState::Created: return "CREATED";
    case TaskState::Submitted: return "SUBMITTED";
    case TaskState::InGraph: return "IN_GRAPH";
    case TaskState::Ready: return "READY";
    case TaskState::Running: return "RUNNING";
    case TaskState::Blocked: return "BLOCKED";
    case TaskState::Finished: return "FINISHED";
    case TaskState::Released: return "RELEASED";
    case TaskState::Deletable: return "DELETABLE";
  }
  return "?";
}

std::string_view to_string(TaskEvent e) noexcept {
  switch (e) {
    case TaskEvent::Submit: return "SUBMIT";
    case TaskEvent::EnterGraph: return "ENTER_GRAPH";
    case TaskEvent::BecomeReady: return "BECOME_READY";
    case TaskEvent::Start: return "START";
    case TaskEvent::Block: return "BLOCK";
    case TaskEvent::Unblock: return "UNBLOCK";
    case TaskEvent::Finish: return "FINISH";
    case TaskEvent::Release: return "RELEASE";
    case TaskEvent::LastChildGone: return "LAST_CHILD_GONE";
  }
  return "?";
}

bool next_state(TaskState from, TaskEvent event, TaskState& to) noexcept {
  using S = TaskState;
  using E = TaskEvent;
  struct Edge {
    S from;
    E event;
    S to;
  };
  static constexpr Edge kEdges[] = {
      {S::Created, E::Submit, S::Submitted},     {S::Submitted, E::EnterGraph, S::InGraph},
      {S::InGraph, E::BecomeReady, S::Ready},    {S::Ready, E::Start, S::Running},
      {S::Running, E::Block, S::Blocked},        {S::Blocked, E::Unblock, S::Running},
      {S::Running, E::Finish, S::Finished},      {S::Finished, E::Release, S::Released},
      {S::Released, E::LastChildGone, S::Deletable},
  };
  for (const auto& e : kEdges) {
    if (e.from == from && e.event == event) {
      to = e.to;
      return true;
    }
  }
  return false;
}

IllegalTransition::IllegalTransition(TaskState from, TaskEvent event)
    : std::logic_error("illegal task transition: " + std::string(to_string(event)) + " from " +
                       std::string(to_string(from))),
      from_(from),
      event_(event) {}

TaskRef::TaskRef(TaskDescriptor* task) noexcept : task_(task) {
  if (task_) task_->retain();
}

TaskRef::~TaskRef() {
  if (task_) task_->release_ref();
}

TaskDescriptor* TaskDescriptor::create(std::uint64_t id, Body body,
                                       std::vector<DependenceClause> clauses,
                                       TaskDescriptor* parent, std::string_view label) {
  auto* task = new TaskDescriptor(id, std::move(body), merge_clauses(std::move(clauses)), parent,
                                  label);
  if (parent) parent->retain();
  return task;
}

TaskDescriptor* TaskDescriptor::create_root() {
  auto* root = new TaskDescriptor(0, nullptr, {}, nullptr, "root");
  root->state_.store(TaskState::Running, std::memory_order_relaxed);
  return root;
}

TaskDescriptor::TaskDescriptor(std::uint64_t id, Body body, std::vector<DependenceClause> clauses,
                               TaskDescriptor* parent, std::string_view label)
    : id_(id), body_(std::move(body)), clauses_(std::move(clauses)), parent_(parent), label_(label) {
  if (parent_) parent_->children_graph();
}

TaskDescriptor::~TaskDescriptor() {
  if (parent_) parent_->release_ref();
}

void TaskDescriptor::release_ref() noexcept {
  if (refs_.fetch_sub(1, std::memory_order_acq_rel) == 1) delete this;
}

void TaskDescriptor::run_body() {
  if (body_) body_();
}

TaskState transition(TaskDescriptor& task, TaskEvent event) {
  TaskState cur = task.state_.load(std::memory_order_acquire);
  TaskState next{};
  do {
    if (!next_state(cur, event, next)) throw IllegalTransition(cur, event);
  } while (!task.state_.compare_exchange_weak(cur, next, std::memory_order_seq_cst));
  return next;
}

bool try_delete(TaskDescriptor& task) {
  // Once a task has finished it cannot gain children, so a zero count here
  // stays zero; the CAS on the state is the single arbitration point.
  if (task.live_children_.load(std::memory_order_seq_cst) != 0) return false;
  TaskState expected = TaskState::Released;
  if (!task.state_.compare_exchange_strong(expected, TaskState::Deletable,
                                           std::memory_order_seq_cst)) {
    return false;
  }
  task.release_ref();
  return true;
}

void attach_child(TaskDescriptor& parent) noexcept {
  parent.live_children_.fetch_add(1, std::memory_order_relaxed);
}

bool detach_child(TaskDescriptor& parent) noexcept {
  const auto prev = parent.live_children_.fetch_sub(1, std::memory_order_seq_cst);
  assert(prev > 0);
  return prev == 1;
}

}  // namespace taskrt
