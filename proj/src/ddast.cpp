#include "taskrt/ddast.hpp"

#include <cassert>
#include <stdexcept>
#include <string>

namespace taskrt {

void DdastConfig::validate() const {
  if (max_ddast_threads == 0 || max_spins == 0 || max_ops_thread == 0) {
    throw std::invalid_argument(
        "max_ddast_threads, max_spins and max_ops_thread must be at least 1");
  }
}

DdastConfig default_config(std::size_t num_threads) {
  if (num_threads == 0) throw std::invalid_argument("num_threads must be at least 1");
  return DdastConfig{(num_threads + 7) / 8, 1, 8, 4};
}

std::string_view to_string(DdastParam p) noexcept {
  switch (p) {
    case DdastParam::MaxDdastThreads: return "MAX_DDAST_THREADS";
    case DdastParam::MaxSpins: return "MAX_SPINS";
    case DdastParam::MaxOpsThread: return "MAX_OPS_THREAD";
    case DdastParam::MinReadyTasks: return "MIN_READY_TASKS";
  }
  return "?";
}

DdastParam parse_ddast_param(std::string_view name) {
  std::string norm(name);
  for (char& c : norm) {
    if (c == '-') c = '_';
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  for (auto p : {DdastParam::MaxDdastThreads, DdastParam::MaxSpins, DdastParam::MaxOpsThread,
                 DdastParam::MinReadyTasks}) {
    if (norm == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown DDAST parameter: " + std::string(name));
}

std::size_t get(const DdastConfig& cfg, DdastParam p) noexcept {
  switch (p) {
    case DdastParam::MaxDdastThreads: return cfg.max_ddast_threads;
    case DdastParam::MaxSpins: return cfg.max_spins;
    case DdastParam::MaxOpsThread: return cfg.max_ops_thread;
    case DdastParam::MinReadyTasks: return cfg.min_ready_tasks;
  }
  return 0;
}

void set(DdastConfig& cfg, DdastParam p, std::size_t value) noexcept {
  switch (p) {
    case DdastParam::MaxDdastThreads: cfg.max_ddast_threads = value; break;
    case DdastParam::MaxSpins: cfg.max_spins = value; break;
    case DdastParam::MaxOpsThread: cfg.max_ops_thread = value; break;
    case DdastParam::MinReadyTasks: cfg.min_ready_tasks = value; break;
  }
}

bool ManagerGauge::try_enter(std::size_t cap) noexcept {
  std::size_t cur = active_.load(std::memory_order_relaxed);
  do {
    if (cur >= cap) return false;
  } while (!active_.compare_exchange_weak(cur, cur + 1, std::memory_order_acq_rel,
                                          std::memory_order_relaxed));
  assert(cur + 1 <= cap);
  std::size_t hw = high_water_.load(std::memory_order_relaxed);
  while (cur + 1 > hw && !high_water_.compare_exchange_weak(hw, cur + 1)) {
  }
  return true;
}

void ManagerGauge::leave() noexcept {
  [[maybe_unused]] const auto prev = active_.fetch_sub(1, std::memory_order_acq_rel);
  assert(prev > 0);
}

DdastManager::DdastManager(DdastConfig cfg, ManagerHost& host) : cfg_(cfg), host_(host) {
  cfg_.validate();
}

std::size_t DdastManager::drain(Mailbox& box, bool& done) {
  std::size_t ops = 0;
  SubmitLease lease;
  if (box.has_submit()) lease = box.lease_submit_queue();
  while (ops < cfg_.max_ops_thread) {
    if (lease) {
      if (auto msg = box.pop_submit(lease)) {
        host_.process_submit(*msg);
        ++ops;
        if ((done = satisfied())) break;
        continue;
      }
    }
    auto msg = box.pop_done();
    if (!msg) break;
    host_.process_done(*msg);
    ++ops;
    if ((done = satisfied())) break;
  }
  processed_.fetch_add(ops, std::memory_order_relaxed);
  return ops;
}

void DdastManager::run(std::size_t self) {
  if (!gauge_.try_enter(cfg_.max_ddast_threads)) return;
  host_.on_manager_enter(self);

  const std::size_t n = host_.mailbox_count();
  std::size_t empty_spins = 0;
  bool done = false;
  while (!done) {
    std::size_t swept = 0;
    for (std::size_t k = 0; k < n && !done; ++k) {
      Mailbox& box = host_.mailbox((self + 1 + k) % n);
      if (box.empty()) continue;
      swept += drain(box, done);
    }
    if (done) break;
    if (swept == 0) {
      if (++empty_spins >= cfg_.max_spins) break;
    } else {
      empty_spins = 0;
    }
  }

  host_.on_manager_exit(self);
  gauge_.leave();
}

}  // namespace taskrt
