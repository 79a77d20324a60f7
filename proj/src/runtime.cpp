#include "taskrt/runtime.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <mutex>
#include <string>

namespace taskrt {

struct Runtime::Worker {
  Runtime* rt = nullptr;
  std::size_t id = 0;
  TaskDescriptor* current = nullptr;
  std::uint64_t next_seq = 1;
  std::vector<TaskDescriptor*> scratch;
};

namespace {

thread_local Runtime::Worker* tls_worker = nullptr;

std::size_t env_size(const char* name, std::size_t fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  std::size_t out = 0;
  const std::string_view s(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw std::invalid_argument(std::string(name) + ": not a non-negative integer: " + v);
  }
  return out;
}

}  // namespace

std::string_view to_string(RuntimeMode m) noexcept {
  return m == RuntimeMode::Baseline ? "baseline" : "ddast";
}

RuntimeMode parse_mode(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "baseline") return RuntimeMode::Baseline;
  if (lower == "ddast") return RuntimeMode::Ddast;
  throw std::invalid_argument("unknown runtime mode: " + std::string(s));
}

RuntimeOptions RuntimeOptions::from_env(RuntimeOptions base) {
  base.num_threads = env_size("TASKRT_THREADS", base.num_threads);
  if (const char* m = std::getenv("TASKRT_MODE"); m && *m) base.mode = parse_mode(m);
  DdastConfig cfg = base.ddast.value_or(default_config(base.num_threads));
  const DdastConfig before = cfg;
  cfg.max_ddast_threads = env_size("TASKRT_MAX_DDAST_THREADS", cfg.max_ddast_threads);
  cfg.max_spins = env_size("TASKRT_MAX_SPINS", cfg.max_spins);
  cfg.max_ops_thread = env_size("TASKRT_MAX_OPS_THREAD", cfg.max_ops_thread);
  cfg.min_ready_tasks = env_size("TASKRT_MIN_READY_TASKS", cfg.min_ready_tasks);
  if (base.ddast || cfg != before) base.ddast = cfg;
  return base;
}

LeakedTasks::LeakedTasks(const RunStats& stats)
    : std::runtime_error("runtime shut down with live tasks: created " +
                         std::to_string(stats.created) + ", deleted " +
                         std::to_string(stats.deleted)),
      stats_(stats) {}

Runtime::Runtime(RuntimeOptions opts)
    : opts_(opts),
      ddast_cfg_(opts.ddast.value_or(default_config(opts.num_threads == 0 ? 1 : opts.num_threads))),
      tracer_(opts.num_threads == 0 ? 1 : opts.num_threads, opts.instrument),
      pool_(opts.num_threads == 0 ? 1 : opts.num_threads),
      root_(nullptr),
      started_(static_cast<std::ptrdiff_t>(opts.num_threads == 0 ? 1 : opts.num_threads)) {
  if (opts_.num_threads == 0) throw std::invalid_argument("num_threads must be at least 1");
  if (tls_worker) throw std::logic_error("calling thread already belongs to a runtime");
  ddast_cfg_.validate();

  const std::size_t n = opts_.num_threads;
  for (std::size_t i = 0; i < n; ++i) {
    mailboxes_.push_back(std::make_unique<Mailbox>());
    auto w = std::make_unique<Worker>();
    w->rt = this;
    w->id = i;
    workers_.push_back(std::move(w));
  }
  root_ = TaskDescriptor::create_root();
  workers_[0]->current = root_;

  if (opts_.mode == RuntimeMode::Ddast) {
    manager_ = std::make_unique<DdastManager>(ddast_cfg_, static_cast<ManagerHost&>(*this));
    dispatcher_.register_callback("ddast", [this](const WorkerContext& ctx) {
      manager_->run(ctx.worker_id);
    });
  }

  tls_worker = workers_[0].get();
  tracer_.thread_state(0, ThreadState::RunningTask, root_->label());
  threads_.reserve(n - 1);
  for (std::size_t i = 1; i < n; ++i) threads_.emplace_back([this, i] { worker_main(i); });
  started_.arrive_and_wait();
}

Runtime::~Runtime() {
  if (!stopped_) {
    try {
      if (current_worker() == std::optional<std::size_t>{0}) taskwait();
    } catch (...) {
    }
    stop_workers();
  }
  // Children that leaked hold their own references to the root.
  TaskRef::adopt(std::exchange(root_, nullptr));
}

std::optional<std::size_t> Runtime::current_worker() const noexcept {
  if (tls_worker && tls_worker->rt == this) return tls_worker->id;
  return std::nullopt;
}

Runtime::Worker& Runtime::require_worker() {
  if (stopped_) throw RuntimeNotStarted("runtime has been shut down");
  if (!tls_worker || tls_worker->rt != this) {
    throw RuntimeNotStarted("calling thread is not a worker of this runtime");
  }
  return *tls_worker;
}

TaskHandle Runtime::spawn(std::function<void()> body, std::vector<DependenceClause> clauses,
                          std::string_view label) {
  Worker& w = require_worker();
  TaskDescriptor* parent = w.current;
  TaskDescriptor* task = TaskDescriptor::create(next_id_.fetch_add(1, std::memory_order_relaxed),
                                                std::move(body), std::move(clauses), parent, label);
  task->creator = w.id;
  task->creation_seq = w.next_seq++;
  TaskHandle handle(task);

  attach_child(*parent);
  transition(*task, TaskEvent::Submit);
  created_.fetch_add(1, std::memory_order_relaxed);
  tracer_.counter_delta(w.id, Counter::Created, +1);

  if (opts_.mode == RuntimeMode::Baseline) {
    submit_to_graph(w, task);
  } else {
    mailboxes_[w.id]->post_submit({task, task->creation_seq});
  }
  return handle;
}

void Runtime::submit_to_graph(Worker& w, TaskDescriptor* task) {
  TaskGraph& graph = task->graph();
  SubmitResult r;
  {
    std::lock_guard guard(graph);
    r = graph.submit(*task);
    task->submit_stamp = submit_clock_.fetch_add(1, std::memory_order_relaxed) + 1;
    in_graph_.fetch_add(1, std::memory_order_relaxed);
    tracer_.counter_delta(w.id, Counter::InGraph, +1);
  }
  if (r.ready) push_ready(w, task);
}

void Runtime::release_from_graph(Worker& w, TaskDescriptor* task) {
  TaskRef guard(task);
  auto& ready = w.scratch;
  ready.clear();
  {
    TaskGraph& graph = task->graph();
    std::lock_guard lock(graph);
    graph.release(*task, ready);
    in_graph_.fetch_sub(1, std::memory_order_relaxed);
    tracer_.counter_delta(w.id, Counter::InGraph, -1);
  }
  for (TaskDescriptor* t : ready) push_ready(w, t);
  ready.clear();
  reclaim(w, task);
}

void Runtime::reclaim(Worker& w, TaskDescriptor* task) {
  TaskRef cur(task);
  while (cur) {
    if (!try_delete(*cur)) return;
    deleted_.fetch_add(1, std::memory_order_relaxed);
    tracer_.counter_delta(w.id, Counter::Deleted, +1);
    TaskRef parent(cur->parent());
    cur.reset();
    if (!detach_child(*parent) || parent.get() == root_) return;
    cur = std::move(parent);
  }
}

void Runtime::push_ready(Worker& w, TaskDescriptor* task) {
  tracer_.counter_delta(w.id, Counter::Ready, +1);
  pool_.push(w.id, task);
}

TaskDescriptor* Runtime::find_task(Worker& w) {
  TaskDescriptor* t = pool_.pop(w.id);
  if (!t) t = pool_.steal(w.id);
  if (t) tracer_.counter_delta(w.id, Counter::Ready, -1);
  return t;
}

void Runtime::execute(Worker& w, TaskDescriptor* task) {
  transition(*task, TaskEvent::Start);
  tracer_.thread_state(w.id, ThreadState::RunningTask, task->label());
  TaskDescriptor* prev = std::exchange(w.current, task);
  try {
    task->run_body();
  } catch (...) {
    if (!has_error_.exchange(true)) first_error_ = std::current_exception();
  }
  w.current = prev;
  task->drop_body();
  transition(*task, TaskEvent::Finish);
  executed_.fetch_add(1, std::memory_order_relaxed);
  tracer_.counter_delta(w.id, Counter::Executed, +1);

  if (opts_.mode == RuntimeMode::Baseline) {
    release_from_graph(w, task);
  } else {
    mailboxes_[w.id]->post_done({task});
  }
}

void Runtime::idle_step(Worker& w) {
  tracer_.thread_state(w.id, ThreadState::Idle);
  dispatcher_.notify_idle(WorkerContext{w.id});
  if (pool_.size() != 0) return;
  // Yielding alone lets a crowd of idle threads starve a preempted thread
  // that holds work (the manager slot, a graph lock) when cores are
  // oversubscribed. Past a few rounds, sleep briefly instead.
  std::this_thread::yield();
}

void Runtime::taskwait() {
  Worker& w = require_worker();
  TaskDescriptor* cur = w.current;
  if (cur->live_children() == 0) return;
  transition(*cur, TaskEvent::Block);
  while (cur->live_children() != 0) {
    if (TaskDescriptor* t = find_task(w)) {
      execute(w, t);
    } else {
      idle_step(w);
    }
  }
  transition(*cur, TaskEvent::Unblock);
  tracer_.thread_state(w.id, ThreadState::RunningTask, cur->label());
}

void Runtime::worker_main(std::size_t id) {
  Worker& w = *workers_[id];
  tls_worker = &w;
  started_.count_down();
  while (!stop_.load(std::memory_order_acquire)) {
    if (TaskDescriptor* t = find_task(w)) {
      execute(w, t);
    } else {
      idle_step(w);
    }
  }
  tracer_.thread_state(id, ThreadState::Idle);
  tls_worker = nullptr;
}

void Runtime::stop_workers() {
  stop_.store(true, std::memory_order_release);
  for (auto& t : threads_) t.join();
  threads_.clear();
  if (tls_worker && tls_worker->rt == this) {
    tracer_.thread_state(0, ThreadState::Idle);
    tls_worker = nullptr;
  }
  stopped_ = true;
}

RunStats Runtime::stats() const {
  RunStats s;
  s.created = created_.load();
  s.executed = executed_.load();
  s.deleted = deleted_.load();
  if (manager_) {
    s.messages_processed = manager_->messages_processed();
    s.max_active_managers = manager_->gauge().high_water();
  }
  return s;
}

RunStats Runtime::shutdown() {
  if (stopped_) throw RuntimeNotStarted("runtime already shut down");
  if (!tls_worker || tls_worker->rt != this || tls_worker->id != 0) {
    throw std::logic_error("shutdown must be called from the thread that created the runtime");
  }
  stop_workers();
  RunStats s = stats();
  if (first_error_) std::rethrow_exception(first_error_);
  if (s.created != s.deleted) throw LeakedTasks(s);
  return s;
}

void Runtime::process_submit(const SubmitTaskMessage& msg) {
  submit_to_graph(*tls_worker, msg.task);
}

void Runtime::process_done(const DoneTaskMessage& msg) {
  release_from_graph(*tls_worker, msg.task);
}

void Runtime::on_manager_enter(std::size_t worker) {
  tracer_.counter_delta(worker, Counter::ActiveManagers, +1);
  tracer_.thread_state(worker, ThreadState::Manager);
}

void Runtime::on_manager_exit(std::size_t worker) {
  tracer_.thread_state(worker, ThreadState::Idle);
  tracer_.counter_delta(worker, Counter::ActiveManagers, -1);
}

}  // namespace taskrt
