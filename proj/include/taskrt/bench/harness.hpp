#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskrt/bench/workloads.hpp"
#include "taskrt/ddast.hpp"
#include "taskrt/runtime.hpp"

namespace taskrt::bench {

struct BenchSpec {
  Benchmark benchmark = Benchmark::Matmul;
  std::size_t ms = 512;
  std::size_t bs = 64;
  std::size_t particles = 1024;
  std::size_t timesteps = 4;
  std::size_t threads = 1;
  RuntimeMode mode = RuntimeMode::Baseline;
  std::optional<std::size_t> max_ddast_threads;
  std::optional<std::size_t> max_spins;
  std::optional<std::size_t> max_ops_thread;
  std::optional<std::size_t> min_ready_tasks;
  std::size_t repetitions = 5;
  std::optional<std::filesystem::path> trace;
  bool dry_run = false;
  SparsityPattern pattern = SparsityPattern::Default;

  // default_config(threads) with the overrides applied.
  DdastConfig ddast_config() const;
  void override_param(DdastParam p, std::size_t value);
  // Throws BadArgs.
  void validate() const;
};

struct Report {
  BenchSpec spec;
  DdastConfig ddast;
  std::vector<std::int64_t> times_ns;
  std::int64_t best_ns = 0;
  std::uint64_t task_count = 0;
  RunStats counters;
};

// Tasks the workload would create, including nested ones. Nothing executes.
std::uint64_t dry_run_count(const BenchSpec& spec);

// Runs `repetitions` timed executions. Each is checked bit-for-bit against
// the sequential reference (VerificationFailed otherwise). When a trace
// path is set, the last repetition is instrumented and its trace written.
Report run(const BenchSpec& spec);

struct SweepRow {
  DdastParam param;
  std::size_t value;
  std::int64_t best_ns;
  // Median over alternating repetitions of default-configuration time over
  // time with `value`.
  double speedup;
};

std::vector<std::size_t> doubling_values(std::size_t lo = 1, std::size_t hi = 128);

std::vector<SweepRow> sweep(const BenchSpec& spec, DdastParam param,
                            const std::vector<std::size_t>& values = doubling_values());

nlohmann::json to_json(const Report& report);
void write_report_csv(std::ostream& out, const Report& report);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

inline constexpr const char* kSweepCsvHeader = "param,value,best_ns,speedup";

}  // namespace taskrt::bench
