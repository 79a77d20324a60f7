#include "taskrt/instrument.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace taskrt {

namespace {

constexpr std::array<std::string_view, kNumCounters> kCounterNames = {
    "IN_GRAPH", "READY", "ACTIVE_MANAGERS", "CREATED", "EXECUTED", "DELETED"};

std::string state_name(ThreadState s, std::string_view label) {
  switch (s) {
    case ThreadState::Idle: return "IDLE";
    case ThreadState::Manager: return "MANAGER";
    case ThreadState::RunningTask:
      return label.empty() ? std::string("RUNNING_TASK") : "RUNNING_TASK:" + std::string(label);
  }
  return "?";
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::string_view to_string(Counter c) noexcept { return kCounterNames[static_cast<std::size_t>(c)]; }

std::optional<Counter> parse_counter(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNumCounters; ++i) {
    if (kCounterNames[i] == name) return static_cast<Counter>(i);
  }
  return std::nullopt;
}

Tracer::Tracer(std::size_t num_threads, bool enabled)
    : enabled_(enabled), start_(std::chrono::steady_clock::now()), buffers_(num_threads) {
  if (enabled_) {
    for (auto& b : buffers_) b.events.reserve(1 << 12);
  }
}

void Tracer::thread_state(std::size_t thread, ThreadState s, std::string_view label) {
  if (!enabled_) return;
  Buffer& b = buffers_[thread];
  const auto code = static_cast<std::uint8_t>(s);
  if (b.last_state == code && b.last_label == label) return;
  std::string_view owned;
  if (!label.empty()) {
    auto it = std::find(b.labels.begin(), b.labels.end(), label);
    if (it == b.labels.end()) it = b.labels.insert(b.labels.end(), std::string(label));
    owned = *it;
  }
  b.last_state = code;
  b.last_label = owned;
  b.events.push_back({now(), EventKind::ThreadState, code, static_cast<std::int64_t>(code), owned});
}

std::size_t Tracer::event_count() const noexcept {
  std::size_t n = 0;
  for (const auto& b : buffers_) n += b.events.size();
  return n;
}

std::vector<TraceRow> Tracer::rows() const {
  struct Ref {
    const Event* e;
    std::size_t thread;
  };
  std::vector<Ref> all;
  all.reserve(event_count());
  for (std::size_t t = 0; t < buffers_.size(); ++t) {
    for (const auto& e : buffers_[t].events) all.push_back({&e, t});
  }
  // Decrements sort ahead of increments at equal timestamps so that a
  // reconstructed level never exceeds the true one.
  std::stable_sort(all.begin(), all.end(), [](const Ref& a, const Ref& b) {
    if (a.e->ts != b.e->ts) return a.e->ts < b.e->ts;
    const std::int64_t da = a.e->kind == EventKind::Counter ? a.e->value : 0;
    const std::int64_t db = b.e->kind == EventKind::Counter ? b.e->value : 0;
    return da < db;
  });

  std::array<std::int64_t, kNumCounters> level{};
  std::vector<TraceRow> out;
  out.reserve(all.size());
  for (const auto& [e, thread] : all) {
    TraceRow row;
    row.timestamp_ns = e->ts;
    row.kind = e->kind;
    row.thread_id = thread;
    if (e->kind == EventKind::Counter) {
      level[e->code] += e->value;
      row.name = std::string(kCounterNames[e->code]);
      row.value = level[e->code];
    } else {
      row.name = state_name(static_cast<ThreadState>(e->code), e->label);
      row.value = e->value;
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::array<std::int64_t, kNumCounters> Tracer::final_levels() const {
  std::array<std::int64_t, kNumCounters> level{};
  for (const auto& b : buffers_) {
    for (const auto& e : b.events) {
      if (e.kind == EventKind::Counter) level[e.code] += e.value;
    }
  }
  return level;
}

void Tracer::write_csv(std::ostream& out) const {
  out << kTraceHeader << '\n';
  for (const auto& r : rows()) {
    out << r.timestamp_ns << ',' << (r.kind == EventKind::Counter ? "COUNTER" : "THREAD_STATE")
        << ',' << r.name << ',' << r.thread_id << ',' << r.value << '\n';
  }
}

void Tracer::flush(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TraceIoError("cannot open trace file " + path.string());
  write_csv(out);
  out.flush();
  if (!out) throw TraceIoError("failed writing trace file " + path.string());
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw TraceIoError("trace CSV: missing or wrong header");
  }
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string_view rest(line);
    std::array<std::string_view, 5> f;
    for (std::size_t i = 0; i < 5; ++i) {
      const auto comma = i < 4 ? rest.find(',') : std::string_view::npos;
      if (i < 4 && comma == std::string_view::npos) {
        throw TraceIoError("trace CSV: short row at line " + std::to_string(lineno));
      }
      f[i] = rest.substr(0, comma);
      if (i < 4) rest.remove_prefix(comma + 1);
    }
    TraceRow r;
    if (f[1] == "COUNTER") {
      r.kind = EventKind::Counter;
    } else if (f[1] == "THREAD_STATE") {
      r.kind = EventKind::ThreadState;
    } else {
      throw TraceIoError("trace CSV: bad kind at line " + std::to_string(lineno));
    }
    r.name = std::string(f[2]);
    if (!parse_int(f[0], r.timestamp_ns) || !parse_int(f[3], r.thread_id) ||
        !parse_int(f[4], r.value)) {
      throw TraceIoError("trace CSV: bad number at line " + std::to_string(lineno));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

double time_average(const std::vector<TraceRow>& rows, Counter counter) {
  const std::string_view name = to_string(counter);
  std::int64_t first = -1, prev_ts = 0, level = 0;
  double area = 0.0;
  for (const auto& r : rows) {
    if (r.kind != EventKind::Counter || r.name != name) continue;
    if (first < 0) {
      first = r.timestamp_ns;
    } else {
      area += static_cast<double>(level) * static_cast<double>(r.timestamp_ns - prev_ts);
    }
    prev_ts = r.timestamp_ns;
    level = r.value;
  }
  if (first < 0 || prev_ts == first) return 0.0;
  return area / static_cast<double>(prev_ts - first);
}

std::int64_t max_level(const std::vector<TraceRow>& rows, Counter counter) {
  const std::string_view name = to_string(counter);
  std::int64_t best = 0;
  for (const auto& r : rows) {
    if (r.kind == EventKind::Counter && r.name == name) best = std::max(best, r.value);
  }
  return best;
}

}  // namespace taskrt
