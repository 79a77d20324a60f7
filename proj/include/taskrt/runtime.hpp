#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <latch>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <vector>

#include "taskrt/clause.hpp"
#include "taskrt/ddast.hpp"
#include "taskrt/dispatcher.hpp"
#include "taskrt/instrument.hpp"
#include "taskrt/mailbox.hpp"
#include "taskrt/ready_pool.hpp"
#include "taskrt/task.hpp"

namespace taskrt {

enum class RuntimeMode { Baseline, Ddast };

std::string_view to_string(RuntimeMode m) noexcept;
// "baseline" or "ddast", case-insensitive.
RuntimeMode parse_mode(std::string_view s);

struct RuntimeOptions {
  // Total workers, including the thread that constructs the runtime.
  std::size_t num_threads = 1;
  RuntimeMode mode = RuntimeMode::Baseline;
  // default_config(num_threads) when unset.
  std::optional<DdastConfig> ddast;
  bool instrument = false;

  // Reads TASKRT_THREADS, TASKRT_MODE, TASKRT_MAX_DDAST_THREADS,
  // TASKRT_MAX_SPINS, TASKRT_MAX_OPS_THREAD and TASKRT_MIN_READY_TASKS on
  // top of `base`.
  static RuntimeOptions from_env(RuntimeOptions base);
  static RuntimeOptions from_env() { return from_env(RuntimeOptions{}); }
};

struct RunStats {
  std::uint64_t created = 0;
  std::uint64_t executed = 0;
  std::uint64_t deleted = 0;
  std::uint64_t messages_processed = 0;
  std::size_t max_active_managers = 0;
};

class RuntimeNotStarted : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class LeakedTasks : public std::runtime_error {
 public:
  explicit LeakedTasks(const RunStats& stats);
  const RunStats& stats() const noexcept { return stats_; }

 private:
  RunStats stats_;
};

// Task-parallel runtime. The constructing thread becomes worker 0 and runs
// the implicit root task; num_threads - 1 pool threads are started before
// the constructor returns.
//
// BASELINE: spawn and task completion update the parent's dependence graph
// inline, under that graph's lock.
// DDAST: spawn and completion post requests to the calling worker's
// mailbox; idle workers drain mailboxes through the dispatcher callback.
class Runtime : private ManagerHost {
 public:
  explicit Runtime(RuntimeOptions opts = {});
  ~Runtime() override;

  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  // Creates a child of the task running on the calling thread. `label`
  // names the task type in traces.
  TaskHandle spawn(std::function<void()> body, std::vector<DependenceClause> clauses = {},
                   std::string_view label = {});

  // Blocks until every direct child of the calling task has been deleted.
  // The caller keeps executing ready tasks (and, in DDAST mode, runtime
  // callbacks) while it waits.
  void taskwait();

  // Joins the pool. Call from the main thread after a final taskwait.
  // Throws LeakedTasks when created != deleted, or rethrows the first
  // exception that escaped a task body.
  RunStats shutdown();

  RunStats stats() const;
  bool running() const noexcept { return !stopped_; }

  std::size_t num_threads() const noexcept { return workers_.size(); }
  RuntimeMode mode() const noexcept { return opts_.mode; }
  const DdastConfig& ddast_config() const noexcept { return ddast_cfg_; }
  Dispatcher& dispatcher() noexcept { return dispatcher_; }
  const Tracer& tracer() const noexcept { return tracer_; }
  void flush_trace(const std::filesystem::path& path) const { tracer_.flush(path); }

  std::size_t ready_count() const override { return pool_.size(); }
  std::int64_t in_graph_count() const noexcept { return in_graph_.load(std::memory_order_relaxed); }

  // Worker id of the calling thread within this runtime, if any.
  std::optional<std::size_t> current_worker() const noexcept;

  // Per-thread worker state; defined in the implementation.
  struct Worker;

 private:
  Worker& require_worker();
  void worker_main(std::size_t id);
  TaskDescriptor* find_task(Worker& w);
  void execute(Worker& w, TaskDescriptor* task);
  void idle_step(Worker& w);
  void submit_to_graph(Worker& w, TaskDescriptor* task);
  void release_from_graph(Worker& w, TaskDescriptor* task);
  void reclaim(Worker& w, TaskDescriptor* task);
  void push_ready(Worker& w, TaskDescriptor* task);
  void stop_workers();

  // ManagerHost
  std::size_t mailbox_count() const override { return mailboxes_.size(); }
  Mailbox& mailbox(std::size_t worker) override { return *mailboxes_[worker]; }
  void process_submit(const SubmitTaskMessage& msg) override;
  void process_done(const DoneTaskMessage& msg) override;
  void on_manager_enter(std::size_t worker) override;
  void on_manager_exit(std::size_t worker) override;

  RuntimeOptions opts_;
  DdastConfig ddast_cfg_;
  Tracer tracer_;
  ReadyPool pool_;
  Dispatcher dispatcher_;
  std::vector<std::unique_ptr<Mailbox>> mailboxes_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::unique_ptr<DdastManager> manager_;
  TaskDescriptor* root_;

  std::atomic<bool> stop_{false};
  bool stopped_ = false;
  std::latch started_;
  std::vector<std::thread> threads_;

  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<std::uint64_t> submit_clock_{0};
  std::atomic<std::int64_t> in_graph_{0};
  std::atomic<std::uint64_t> created_{0};
  std::atomic<std::uint64_t> executed_{0};
  std::atomic<std::uint64_t> deleted_{0};

  std::atomic<bool> has_error_{false};
  std::exception_ptr first_error_;
};

}  // namespace taskrt
