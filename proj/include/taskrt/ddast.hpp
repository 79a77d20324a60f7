#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "taskrt/mailbox.hpp"

namespace taskrt {

struct DdastConfig {
  // Threads allowed inside the callback at once.
  std::size_t max_ddast_threads = 1;
  // Consecutive unproductive sweeps over all mailboxes before leaving.
  std::size_t max_spins = 1;
  // Messages taken from one mailbox before moving to the next.
  std::size_t max_ops_thread = 8;
  // Ready-task level at which the manager goes back to running tasks.
  std::size_t min_ready_tasks = 4;

  void validate() const;
  friend bool operator==(const DdastConfig&, const DdastConfig&) = default;
};

// Tuned defaults: ceil(num_threads / 8) managers, 1 spin, 8 ops, 4 ready.
DdastConfig default_config(std::size_t num_threads);

enum class DdastParam { MaxDdastThreads, MaxSpins, MaxOpsThread, MinReadyTasks };

std::string_view to_string(DdastParam p) noexcept;
// Accepts the upper-case names (MAX_OPS_THREAD) and the CLI spelling
// (max-ops-thread). Throws std::invalid_argument otherwise.
DdastParam parse_ddast_param(std::string_view name);
std::size_t get(const DdastConfig& cfg, DdastParam p) noexcept;
void set(DdastConfig& cfg, DdastParam p, std::size_t value) noexcept;

// Admission counter for the callback.
class ManagerGauge {
 public:
  bool try_enter(std::size_t cap) noexcept;
  void leave() noexcept;

  std::size_t active() const noexcept { return active_.load(std::memory_order_acquire); }
  std::size_t high_water() const noexcept { return high_water_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::size_t> active_{0};
  std::atomic<std::size_t> high_water_{0};
};

// What the manager loop needs from the runtime. process_* run the graph
// operations for one message on the calling thread.
class ManagerHost {
 public:
  virtual ~ManagerHost() = default;

  virtual std::size_t mailbox_count() const = 0;
  virtual Mailbox& mailbox(std::size_t worker) = 0;
  virtual std::size_t ready_count() const = 0;
  virtual void process_submit(const SubmitTaskMessage& msg) = 0;
  virtual void process_done(const DoneTaskMessage& msg) = 0;

  virtual void on_manager_enter(std::size_t /*worker*/) {}
  virtual void on_manager_exit(std::size_t /*worker*/) {}
};

class DdastManager {
 public:
  DdastManager(DdastConfig cfg, ManagerHost& host);

  // Body of the dispatcher callback for worker `self`.
  void run(std::size_t self);

  const DdastConfig& config() const noexcept { return cfg_; }
  const ManagerGauge& gauge() const noexcept { return gauge_; }
  std::uint64_t messages_processed() const noexcept {
    return processed_.load(std::memory_order_relaxed);
  }

 private:
  // Drains up to max_ops_thread messages from one mailbox, submits first.
  // Returns the number processed; sets `satisfied` once the ready level
  // reaches min_ready_tasks.
  std::size_t drain(Mailbox& box, bool& satisfied);
  bool satisfied() const { return host_.ready_count() >= cfg_.min_ready_tasks; }

  DdastConfig cfg_;
  ManagerHost& host_;
  ManagerGauge gauge_;
  std::atomic<std::uint64_t> processed_{0};
};

}  // namespace taskrt
