#include "taskrt/bench/harness.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <memory>
#include <ostream>
#include <string>

namespace taskrt::bench {

namespace {

using Clock = std::chrono::steady_clock;

// One benchmark instance: data, its task decomposition, its sequential
// reference and a bitwise comparison.
class Workload {
 public:
  virtual ~Workload() = default;
  virtual void emit(TaskSink& sink) = 0;
  virtual void reference() = 0;
  virtual bool matches(const Workload& other) const = 0;
};

class MatmulWorkload final : public Workload {
 public:
  explicit MatmulWorkload(const MatmulParams& p) : data_(p) {}
  void emit(TaskSink& sink) override { emit_matmul(data_.params(), sink, &data_); }
  void reference() override { matmul_reference(data_); }
  bool matches(const Workload& o) const override {
    return same_bits(data_, static_cast<const MatmulWorkload&>(o).data_);
  }

 private:
  MatmulProblem data_;
};

class NBodyWorkload final : public Workload {
 public:
  explicit NBodyWorkload(const NBodyParams& p) : data_(p) {}
  void emit(TaskSink& sink) override { emit_nbody(data_.params(), sink, &data_); }
  void reference() override { nbody_reference(data_); }
  bool matches(const Workload& o) const override {
    return same_bits(data_, static_cast<const NBodyWorkload&>(o).data_);
  }

 private:
  NBodyProblem data_;
};

class SparseLuWorkload final : public Workload {
 public:
  explicit SparseLuWorkload(const SparseLuParams& p) : data_(p) {}
  void emit(TaskSink& sink) override { emit_sparselu(data_.params(), sink, &data_); }
  void reference() override { sparselu_reference(data_); }
  bool matches(const Workload& o) const override {
    return same_bits(data_, static_cast<const SparseLuWorkload&>(o).data_);
  }

 private:
  SparseLuProblem data_;
};

MatmulParams matmul_params(const BenchSpec& s) { return {s.ms, s.bs}; }
NBodyParams nbody_params(const BenchSpec& s) { return {s.particles, s.timesteps, s.bs}; }
SparseLuParams sparselu_params(const BenchSpec& s) { return {s.ms, s.bs, s.pattern}; }

std::unique_ptr<Workload> make_workload(const BenchSpec& s) {
  switch (s.benchmark) {
    case Benchmark::Matmul: return std::make_unique<MatmulWorkload>(matmul_params(s));
    case Benchmark::NBody: return std::make_unique<NBodyWorkload>(nbody_params(s));
    case Benchmark::SparseLu: return std::make_unique<SparseLuWorkload>(sparselu_params(s));
  }
  throw BadArgs("unknown benchmark");
}

}  // namespace

DdastConfig BenchSpec::ddast_config() const {
  DdastConfig cfg = default_config(threads == 0 ? 1 : threads);
  if (max_ddast_threads) cfg.max_ddast_threads = *max_ddast_threads;
  if (max_spins) cfg.max_spins = *max_spins;
  if (max_ops_thread) cfg.max_ops_thread = *max_ops_thread;
  if (min_ready_tasks) cfg.min_ready_tasks = *min_ready_tasks;
  return cfg;
}

void BenchSpec::override_param(DdastParam p, std::size_t value) {
  switch (p) {
    case DdastParam::MaxDdastThreads: max_ddast_threads = value; break;
    case DdastParam::MaxSpins: max_spins = value; break;
    case DdastParam::MaxOpsThread: max_ops_thread = value; break;
    case DdastParam::MinReadyTasks: min_ready_tasks = value; break;
  }
}

void BenchSpec::validate() const {
  if (threads == 0) throw BadArgs("threads must be at least 1");
  if (repetitions == 0) throw BadArgs("repetitions must be at least 1");
  try {
    ddast_config().validate();
  } catch (const std::invalid_argument& e) {
    throw BadArgs(e.what());
  }
  switch (benchmark) {
    case Benchmark::Matmul: matmul_params(*this).validate(); break;
    case Benchmark::NBody: nbody_params(*this).validate(); break;
    case Benchmark::SparseLu: sparselu_params(*this).validate(); break;
  }
}

std::uint64_t dry_run_count(const BenchSpec& spec) {
  spec.validate();
  CountingSink sink;
  switch (spec.benchmark) {
    case Benchmark::Matmul: emit_matmul(matmul_params(spec), sink, nullptr); break;
    case Benchmark::NBody: emit_nbody(nbody_params(spec), sink, nullptr); break;
    case Benchmark::SparseLu: emit_sparselu(sparselu_params(spec), sink, nullptr); break;
  }
  return sink.count();
}

namespace {

struct Repetition {
  std::int64_t ns;
  RunStats counters;
};

// One timed execution, checked against `expected`.
Repetition run_once(const BenchSpec& spec, const Workload& expected, bool traced) {
  auto work = make_workload(spec);
  RuntimeOptions opts;
  opts.num_threads = spec.threads;
  opts.mode = spec.mode;
  opts.ddast = spec.ddast_config();
  opts.instrument = traced;
  Runtime rt(opts);
  RuntimeSink sink(rt);

  const auto t0 = Clock::now();
  work->emit(sink);
  rt.taskwait();
  const auto t1 = Clock::now();
  Repetition r{std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count(), rt.shutdown()};

  if (!work->matches(expected)) {
    throw VerificationFailed(std::string(to_string(spec.benchmark)) + " (" +
                             std::string(to_string(spec.mode)) + ", " +
                             std::to_string(spec.threads) +
                             " threads) differs from the sequential reference");
  }
  if (traced) rt.flush_trace(*spec.trace);
  return r;
}

double median(std::vector<double> xs) {
  const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
  std::nth_element(xs.begin(), mid, xs.end());
  if (xs.size() % 2 != 0) return *mid;
  return (*mid + *std::max_element(xs.begin(), mid)) / 2.0;
}

std::unique_ptr<Workload> make_expected(const BenchSpec& spec) {
  auto expected = make_workload(spec);
  expected->reference();
  return expected;
}

}  // namespace

Report run(const BenchSpec& spec) {
  spec.validate();
  Report report;
  report.spec = spec;
  report.ddast = spec.ddast_config();
  if (spec.dry_run) {
    report.task_count = dry_run_count(spec);
    return report;
  }

  const auto expected = make_expected(spec);
  for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
    const bool traced = spec.trace && rep + 1 == spec.repetitions;
    const Repetition r = run_once(spec, *expected, traced);
    report.times_ns.push_back(r.ns);
    report.counters = r.counters;
    report.task_count = r.counters.created;
  }
  report.best_ns = *std::min_element(report.times_ns.begin(), report.times_ns.end());
  return report;
}

std::vector<std::size_t> doubling_values(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v;
  for (std::size_t x = lo; x >= 1 && x <= hi; x *= 2) v.push_back(x);
  return v;
}

std::vector<SweepRow> sweep(const BenchSpec& spec, DdastParam param,
                            const std::vector<std::size_t>& values) {
  if (spec.mode != RuntimeMode::Ddast) throw BadArgs("sweep requires --mode ddast");
  if (spec.dry_run) throw BadArgs("sweep cannot be combined with --dry-run");
  if (values.empty()) throw BadArgs("sweep needs at least one value");
  spec.validate();

  BenchSpec base = spec;
  base.trace.reset();
  const auto expected = make_expected(base);

  // Default and overridden repetitions alternate so that both sides of each
  // pair see the same machine conditions. The median pair ratio is far less
  // sensitive to a noisy host than a ratio of two minima.
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (std::size_t v : values) {
    BenchSpec s = base;
    s.override_param(param, v);
    s.validate();
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::vector<double> ratios;
    ratios.reserve(base.repetitions);
    for (std::size_t rep = 0; rep < base.repetitions; ++rep) {
      const std::int64_t default_ns = run_once(base, *expected, false).ns;
      const std::int64_t ns = run_once(s, *expected, false).ns;
      best = std::min(best, ns);
      ratios.push_back(static_cast<double>(default_ns) / static_cast<double>(ns));
    }
    rows.push_back({param, v, best, median(ratios)});
  }
  return rows;
}

nlohmann::json to_json(const Report& r) {
  const BenchSpec& s = r.spec;
  nlohmann::json j;
  j["benchmark"] = to_string(s.benchmark);
  j["ms"] = s.ms;
  j["bs"] = s.bs;
  j["particles"] = s.particles;
  j["timesteps"] = s.timesteps;
  j["threads"] = s.threads;
  j["mode"] = to_string(s.mode);
  j["ddast"] = {{"max_ddast_threads", r.ddast.max_ddast_threads},
                {"max_spins", r.ddast.max_spins},
                {"max_ops_thread", r.ddast.max_ops_thread},
                {"min_ready_tasks", r.ddast.min_ready_tasks}};
  j["times_ns"] = r.times_ns;
  j["best_ns"] = r.best_ns;
  j["task_count"] = r.task_count;
  j["counters"] = {{"created", r.counters.created},
                   {"executed", r.counters.executed},
                   {"deleted", r.counters.deleted},
                   {"messages_processed", r.counters.messages_processed},
                   {"max_active_managers", r.counters.max_active_managers}};
  if (s.dry_run) j["dry_run"] = true;
  return j;
}

void write_report_csv(std::ostream& out, const Report& r) {
  const BenchSpec& s = r.spec;
  out << "benchmark,ms,bs,particles,timesteps,threads,mode,repetition,time_ns,task_count\n";
  auto prefix = [&] {
    out << to_string(s.benchmark) << ',' << s.ms << ',' << s.bs << ',' << s.particles << ','
        << s.timesteps << ',' << s.threads << ',' << to_string(s.mode) << ',';
  };
  if (r.times_ns.empty()) {
    prefix();
    out << ",," << r.task_count << '\n';
    return;
  }
  for (std::size_t i = 0; i < r.times_ns.size(); ++i) {
    prefix();
    out << i << ',' << r.times_ns[i] << ',' << r.task_count << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.param) << ',' << r.value << ',' << r.best_ns << ',' << r.speedup << '\n';
  }
}

}  // namespace taskrt::bench
