#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace taskrt {

struct WorkerContext {
  std::size_t worker_id = 0;
};

class DuplicateCallback : public std::invalid_argument {
 public:
  explicit DuplicateCallback(const std::string& name)
      : std::invalid_argument("callback already registered: " + name) {}
};

// Registry of runtime services that idle workers run in place of tasks.
// Registration may happen at any time; callers of notify_idle never take a
// lock and see every callback whose registration completed before the call.
class Dispatcher {
 public:
  using Callback = std::function<void(const WorkerContext&)>;
  static constexpr std::size_t kMaxCallbacks = 16;

  void register_callback(std::string name, Callback entry);
  void set_enabled(std::string_view name, bool enabled);

  // Runs every enabled callback once, in registration order, on the
  // calling thread.
  void notify_idle(const WorkerContext& ctx) const;

  std::size_t size() const noexcept { return count_.load(std::memory_order_acquire); }

 private:
  struct Entry {
    std::string name;
    Callback entry;
    std::atomic<bool> enabled{true};
  };

  std::mutex register_lock_;
  std::array<std::unique_ptr<Entry>, kMaxCallbacks> entries_;
  std::atomic<std::size_t> count_{0};
};

}  // namespace taskrt
