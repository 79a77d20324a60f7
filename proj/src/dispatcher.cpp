#include "taskrt/dispatcher.hpp"

namespace taskrt {

void Dispatcher::register_callback(std::string name, Callback entry) {
  std::lock_guard guard(register_lock_);
  const std::size_t n = count_.load(std::memory_order_relaxed);
  for (std::size_t i = 0; i < n; ++i) {
    if (entries_[i]->name == name) throw DuplicateCallback(name);
  }
  if (n == kMaxCallbacks) throw std::length_error("dispatcher callback table is full");
  auto e = std::make_unique<Entry>();
  e->name = std::move(name);
  e->entry = std::move(entry);
  entries_[n] = std::move(e);
  count_.store(n + 1, std::memory_order_release);
}

void Dispatcher::set_enabled(std::string_view name, bool enabled) {
  const std::size_t n = count_.load(std::memory_order_acquire);
  for (std::size_t i = 0; i < n; ++i) {
    if (entries_[i]->name == name) {
      entries_[i]->enabled.store(enabled, std::memory_order_release);
      return;
    }
  }
  throw std::out_of_range("no callback named " + std::string(name));
}

void Dispatcher::notify_idle(const WorkerContext& ctx) const {
  const std::size_t n = count_.load(std::memory_order_acquire);
  for (std::size_t i = 0; i < n; ++i) {
    const Entry& e = *entries_[i];
    if (e.enabled.load(std::memory_order_acquire)) e.entry(ctx);
  }
}

}  // namespace taskrt
