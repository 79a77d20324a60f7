#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <deque>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace taskrt {

enum class Counter : std::uint8_t { InGraph, Ready, ActiveManagers, Created, Executed, Deleted };
inline constexpr std::size_t kNumCounters = 6;

enum class ThreadState : std::uint8_t { Idle = 0, RunningTask = 1, Manager = 2 };

std::string_view to_string(Counter c) noexcept;
std::optional<Counter> parse_counter(std::string_view name) noexcept;

enum class EventKind : std::uint8_t { Counter, ThreadState };

// One row of the exported trace. For counters `value` is the absolute level
// after the event; for thread states it is the state code.
struct TraceRow {
  std::int64_t timestamp_ns = 0;
  EventKind kind = EventKind::Counter;
  std::string name;
  std::size_t thread_id = 0;
  std::int64_t value = 0;
};

inline constexpr std::string_view kTraceHeader = "timestamp_ns,kind,name,thread_id,value";

class TraceIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-thread event buffers. Thread `i` writes only buffer `i`; merging and
// export happen once all writers have stopped.
class Tracer {
 public:
  Tracer(std::size_t num_threads, bool enabled);

  bool enabled() const noexcept { return enabled_; }
  std::size_t num_threads() const noexcept { return buffers_.size(); }

  void counter_delta(std::size_t thread, Counter c, std::int64_t delta) {
    if (!enabled_) return;
    buffers_[thread].events.push_back({now(), EventKind::Counter, static_cast<std::uint8_t>(c), delta, {}});
  }

  // Records a change of state. Repeating the current state is a no-op.
  void thread_state(std::size_t thread, ThreadState s, std::string_view label = {});

  std::size_t event_count() const noexcept;

  // Merged, timestamp-ordered rows with counters reconstructed to levels.
  std::vector<TraceRow> rows() const;
  // Final level of every counter seen in the trace.
  std::array<std::int64_t, kNumCounters> final_levels() const;

  void write_csv(std::ostream& out) const;
  void flush(const std::filesystem::path& path) const;

 private:
  struct Event {
    std::int64_t ts;
    EventKind kind;
    std::uint8_t code;
    std::int64_t value;
    std::string_view label;
  };
  struct alignas(64) Buffer {
    std::vector<Event> events;
    std::uint8_t last_state = 0xff;
    std::string_view last_label;
    // Owned copies of task labels; events outlive the tasks they name.
    std::deque<std::string> labels;
  };

  std::int64_t now() const noexcept {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

  bool enabled_;
  std::chrono::steady_clock::time_point start_;
  std::vector<Buffer> buffers_;
};

// Parses a trace CSV written by Tracer::write_csv. Throws TraceIoError on a
// malformed header or row.
std::vector<TraceRow> read_trace_csv(std::istream& in);

// Time-weighted mean level of `counter` between its first and last event.
double time_average(const std::vector<TraceRow>& rows, Counter counter);
// Highest level of `counter` in the series (0 if absent).
std::int64_t max_level(const std::vector<TraceRow>& rows, Counter counter);

}  // namespace taskrt
