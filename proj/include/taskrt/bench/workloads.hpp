#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "taskrt/clause.hpp"

namespace taskrt {
class Runtime;
}

namespace taskrt::bench {

class BadArgs : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class VerificationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Benchmark { Matmul, SparseLu, NBody };

std::string_view to_string(Benchmark b) noexcept;
Benchmark parse_benchmark(std::string_view name);

struct TaskSpec {
  std::string_view label;
  std::vector<DependenceClause> clauses;
  std::function<void()> body;
  // The body spawns children; dry runs execute it to count them.
  bool nested = false;
};

// Where a workload sends its tasks.
class TaskSink {
 public:
  virtual ~TaskSink() = default;
  virtual void spawn(TaskSpec task) = 0;
  virtual void taskwait() = 0;
};

class RuntimeSink final : public TaskSink {
 public:
  explicit RuntimeSink(Runtime& rt) : rt_(rt) {}
  void spawn(TaskSpec task) override;
  void taskwait() override;

 private:
  Runtime& rt_;
};

// Counts tasks without running leaf bodies.
class CountingSink final : public TaskSink {
 public:
  void spawn(TaskSpec task) override;
  void taskwait() override {}
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t count_ = 0;
};

// Runs every body at its spawn point, i.e. in program order.
class InlineSink final : public TaskSink {
 public:
  void spawn(TaskSpec task) override;
  void taskwait() override {}
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t count_ = 0;
};

// Identity of block (i, j) of array `array`.
Token block_token(std::uint32_t array, std::size_t i, std::size_t j = 0) noexcept;

// ---------------------------------------------------------------------------
// Blocked matrix multiply, C += A * B.

struct MatmulParams {
  std::size_t ms = 512;
  std::size_t bs = 64;

  void validate() const;
  std::size_t blocks() const noexcept { return ms / bs; }
};

class MatmulProblem {
 public:
  explicit MatmulProblem(const MatmulParams& p);

  const MatmulParams& params() const noexcept { return p_; }
  double* a(std::size_t i, std::size_t j) noexcept { return block(a_, i, j); }
  double* b(std::size_t i, std::size_t j) noexcept { return block(b_, i, j); }
  double* c(std::size_t i, std::size_t j) noexcept { return block(c_, i, j); }
  const std::vector<double>& result() const noexcept { return c_; }

 private:
  double* block(std::vector<double>& m, std::size_t i, std::size_t j) noexcept {
    return m.data() + (i * p_.blocks() + j) * p_.bs * p_.bs;
  }

  MatmulParams p_;
  std::vector<double> a_, b_, c_;
};

void matmul_block(const double* a, const double* b, double* c, std::size_t bs) noexcept;

// n^3 tasks; task (i, j, k) reads A(i,k) and B(k,j) and updates C(i,j).
// `data` may be null for counting.
void emit_matmul(const MatmulParams& p, TaskSink& sink, MatmulProblem* data);
void matmul_reference(MatmulProblem& data);

// ---------------------------------------------------------------------------
// N-Body with one nested task per time step.

struct NBodyParams {
  std::size_t particles = 1024;
  std::size_t timesteps = 4;
  std::size_t bs = 128;

  void validate() const;
  std::size_t blocks() const noexcept { return particles / bs; }
};

struct ParticleBlock {
  std::vector<double> x, y, z, vx, vy, vz, mass;
};

struct ForceBlock {
  std::vector<double> fx, fy, fz;
};

class NBodyProblem {
 public:
  explicit NBodyProblem(const NBodyParams& p);

  const NBodyParams& params() const noexcept { return p_; }
  std::vector<ParticleBlock>& particles() noexcept { return particles_; }
  std::vector<ForceBlock>& forces() noexcept { return forces_; }
  const std::vector<ParticleBlock>& particles() const noexcept { return particles_; }

 private:
  NBodyParams p_;
  std::vector<ParticleBlock> particles_;
  std::vector<ForceBlock> forces_;
};

// Adds the pull of `source` on every particle of `target` into `f`.
void nbody_force_block(const ParticleBlock& target, const ParticleBlock& source, ForceBlock& f,
                       bool same_block) noexcept;
void nbody_update(std::vector<ParticleBlock>& particles, std::vector<ForceBlock>& forces) noexcept;

// Per step: one task that spawns n^2 force tasks and one update task, then
// waits for them. timesteps * (n^2 + 2) tasks in total.
void emit_nbody(const NBodyParams& p, TaskSink& sink, NBodyProblem* data);
void nbody_reference(NBodyProblem& data);

// ---------------------------------------------------------------------------
// Sparse LU without pivoting over a block-sparse matrix.

enum class SparsityPattern { Default, Dense, DiagonalOnly };

// Initial presence of block (i, j). Default keeps the diagonal, blocks above
// it in rows i with i % 3 != 0 and blocks below it in columns j % 3 != 0.
bool initially_present(SparsityPattern pattern, std::size_t i, std::size_t j) noexcept;

struct SparseLuParams {
  std::size_t ms = 1024;
  std::size_t bs = 64;
  SparsityPattern pattern = SparsityPattern::Default;

  void validate() const;
  std::size_t blocks() const noexcept { return ms / bs; }
};

class SparseLuProblem {
 public:
  explicit SparseLuProblem(const SparseLuParams& p);

  const SparseLuParams& params() const noexcept { return p_; }
  double* block(std::size_t i, std::size_t j) noexcept { return blocks_[i * p_.blocks() + j].get(); }
  const double* block(std::size_t i, std::size_t j) const noexcept {
    return blocks_[i * p_.blocks() + j].get();
  }
  // Zero-filled block created on first write (fill-in).
  double* allocate(std::size_t i, std::size_t j);

 private:
  SparseLuParams p_;
  std::vector<std::unique_ptr<double[]>> blocks_;
};

void lu0(double* diag, std::size_t bs) noexcept;
void fwd(const double* diag, double* col, std::size_t bs) noexcept;
void bdiv(const double* diag, double* row, std::size_t bs) noexcept;
void bmod(const double* row, const double* col, double* inner, std::size_t bs) noexcept;

void emit_sparselu(const SparseLuParams& p, TaskSink& sink, SparseLuProblem* data);
void sparselu_reference(SparseLuProblem& data);

// Bitwise comparison of results.
bool same_bits(const MatmulProblem& a, const MatmulProblem& b) noexcept;
bool same_bits(const NBodyProblem& a, const NBodyProblem& b) noexcept;
bool same_bits(const SparseLuProblem& a, const SparseLuProblem& b) noexcept;

}  // namespace taskrt::bench
