#include "taskrt/bench/workloads.hpp"

#include <cctype>

#include "taskrt/runtime.hpp"

namespace taskrt::bench {

std::string_view to_string(Benchmark b) noexcept {
  switch (b) {
    case Benchmark::Matmul: return "matmul";
    case Benchmark::SparseLu: return "sparselu";
    case Benchmark::NBody: return "nbody";
  }
  return "?";
}

Benchmark parse_benchmark(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "matmul") return Benchmark::Matmul;
  if (lower == "sparselu") return Benchmark::SparseLu;
  if (lower == "nbody") return Benchmark::NBody;
  throw BadArgs("unknown benchmark: " + std::string(name));
}

void RuntimeSink::spawn(TaskSpec task) {
  rt_.spawn(std::move(task.body), std::move(task.clauses), task.label);
}

void RuntimeSink::taskwait() { rt_.taskwait(); }

void CountingSink::spawn(TaskSpec task) {
  ++count_;
  if (task.nested && task.body) task.body();
}

void InlineSink::spawn(TaskSpec task) {
  ++count_;
  if (task.body) task.body();
}

Token block_token(std::uint32_t array, std::size_t i, std::size_t j) noexcept {
  // 8 bits of array id, 28 bits per coordinate.
  return token_from((std::uint64_t{array} << 56) | ((std::uint64_t{i} & 0xFFFFFFF) << 28) |
                    (std::uint64_t{j} & 0xFFFFFFF));
}

}  // namespace taskrt::bench
