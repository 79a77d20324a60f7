// bench <matmul|sparselu|nbody> [options]
//
// Exit status: 0 ok, 2 bad arguments, 3 verification failure, 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "taskrt/bench/harness.hpp"

using namespace taskrt;
using namespace taskrt::bench;

namespace {

SparsityPattern parse_pattern(const std::string& s) {
  if (s == "default") return SparsityPattern::Default;
  if (s == "dense") return SparsityPattern::Dense;
  if (s == "diagonal") return SparsityPattern::DiagonalOnly;
  throw BadArgs("unknown pattern: " + s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blocked task benchmarks on the taskrt runtime"};

  std::string benchmark, mode = "baseline", report_fmt = "json", pattern = "default";
  std::string trace, sweep_param, output;
  BenchSpec spec;
  std::size_t max_ddast = 0, max_spins = 0, max_ops = 0, min_ready = 0;

  app.add_option("benchmark", benchmark, "matmul, sparselu or nbody")
      ->required()
      ->envname("TASKRT_BENCHMARK");
  app.add_option("--ms", spec.ms, "matrix dimension in elements")->envname("TASKRT_MS");
  app.add_option("--bs", spec.bs, "block dimension in elements")->envname("TASKRT_BS");
  app.add_option("--particles", spec.particles)->envname("TASKRT_PARTICLES");
  app.add_option("--timesteps", spec.timesteps)->envname("TASKRT_TIMESTEPS");
  app.add_option("--threads", spec.threads)->envname("TASKRT_THREADS");
  app.add_option("--mode", mode, "baseline or ddast")->envname("TASKRT_MODE");
  auto* o_mdt = app.add_option("--max-ddast-threads", max_ddast)->envname("TASKRT_MAX_DDAST_THREADS");
  auto* o_ms = app.add_option("--max-spins", max_spins)->envname("TASKRT_MAX_SPINS");
  auto* o_mot = app.add_option("--max-ops-thread", max_ops)->envname("TASKRT_MAX_OPS_THREAD");
  auto* o_mrt = app.add_option("--min-ready-tasks", min_ready)->envname("TASKRT_MIN_READY_TASKS");
  app.add_option("--repetitions", spec.repetitions)->envname("TASKRT_REPETITIONS");
  app.add_option("--trace", trace, "write a CSV trace of the last repetition")
      ->envname("TASKRT_TRACE");
  app.add_flag("--dry-run", spec.dry_run, "count tasks only")->envname("TASKRT_DRY_RUN");
  app.add_option("--report", report_fmt, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->envname("TASKRT_REPORT");
  app.add_option("--pattern", pattern, "sparselu block pattern: default, dense or diagonal")
      ->envname("TASKRT_PATTERN");
  app.add_option("--sweep", sweep_param,
                 "sweep one DDAST parameter over 1,2,4..128 and print CSV")
      ->envname("TASKRT_SWEEP");
  app.add_option("-o,--output", output, "write the report here instead of stdout")
      ->envname("TASKRT_OUTPUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    spec.benchmark = parse_benchmark(benchmark);
    try {
      spec.mode = parse_mode(mode);
    } catch (const std::invalid_argument& e) {
      throw BadArgs(e.what());
    }
    spec.pattern = parse_pattern(pattern);
    if (o_mdt->count()) spec.max_ddast_threads = max_ddast;
    if (o_ms->count()) spec.max_spins = max_spins;
    if (o_mot->count()) spec.max_ops_thread = max_ops;
    if (o_mrt->count()) spec.min_ready_tasks = min_ready;
    if (!trace.empty()) spec.trace = trace;

    std::ofstream file;
    if (!output.empty()) {
      file.open(output);
      if (!file) throw std::runtime_error("cannot open " + output);
    }
    std::ostream& out = output.empty() ? std::cout : file;

    if (!sweep_param.empty()) {
      DdastParam p;
      try {
        p = parse_ddast_param(sweep_param);
      } catch (const std::invalid_argument& e) {
        throw BadArgs(e.what());
      }
      write_sweep_csv(out, sweep(spec, p));
      return 0;
    }

    const Report r = run(spec);
    if (report_fmt == "csv")
      write_report_csv(out, r);
    else
      out << to_json(r).dump(2) << '\n';
  } catch (const BadArgs& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 2;
  } catch (const VerificationFailed& e) {
    std::cerr << "bench: verification failed: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
