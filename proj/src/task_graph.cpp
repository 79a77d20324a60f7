#include "taskrt/task_graph.hpp"

#include <algorithm>

#include "taskrt/task.hpp"

namespace taskrt {

namespace {

void erase_one(std::vector<TaskDescriptor*>& v, TaskDescriptor* t) {
  auto it = std::find(v.begin(), v.end(), t);
  if (it != v.end()) {
    *it = v.back();
    v.pop_back();
  }
}

}  // namespace

const TokenEntry* TaskGraph::find(Token token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

SubmitResult TaskGraph::submit(TaskDescriptor& task) {
  auto& preds = scratch_;
  preds.clear();

  for (const auto& clause : task.clauses()) {
    TokenEntry& entry = entries_[clause.token];
    if (entry.last_writer) preds.push_back(entry.last_writer);
    if (clause.direction == Direction::In) {
      entry.readers_since_write.push_back(&task);
    } else {
      preds.insert(preds.end(), entry.readers_since_write.begin(), entry.readers_since_write.end());
      entry.readers_since_write.clear();
      entry.last_writer = &task;
    }
  }

  std::sort(preds.begin(), preds.end());
  preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
  for (TaskDescriptor* pred : preds) pred->successors_.push_back(&task);

  task.pending_.store(static_cast<std::int64_t>(preds.size()), std::memory_order_release);
  transition(task, TaskEvent::EnterGraph);
  ++in_graph_count_;

  SubmitResult result{preds.empty(), preds.size()};
  if (result.ready) transition(task, TaskEvent::BecomeReady);
  return result;
}

void TaskGraph::release(TaskDescriptor& task, std::vector<TaskDescriptor*>& ready_out) {
  for (const auto& clause : task.clauses()) {
    auto it = entries_.find(clause.token);
    if (it == entries_.end()) continue;
    TokenEntry& entry = it->second;
    if (entry.last_writer == &task) entry.last_writer = nullptr;
    erase_one(entry.readers_since_write, &task);
    if (entry.empty()) entries_.erase(it);
  }

  for (TaskDescriptor* succ : task.successors_) {
    if (succ->pending_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
      transition(*succ, TaskEvent::BecomeReady);
      ready_out.push_back(succ);
    }
  }
  task.successors_.clear();
  task.successors_.shrink_to_fit();

  transition(task, TaskEvent::Release);
  --in_graph_count_;
}

}  // namespace taskrt
