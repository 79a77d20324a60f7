#include <cstring>

#include "taskrt/bench/workloads.hpp"

namespace taskrt::bench {

namespace {

constexpr std::uint32_t kArrayA = 1, kArrayB = 2, kArrayC = 3;

void fill(std::vector<double>& m, std::uint32_t seed) {
  std::uint32_t x = seed;
  for (double& v : m) {
    x = x * 1664525u + 1013904223u;
    v = static_cast<double>(x >> 20) / 4096.0 - 128.0;
  }
}

}  // namespace

void MatmulParams::validate() const {
  if (bs == 0 || ms == 0) throw BadArgs("matmul: ms and bs must be positive");
  if (ms % bs != 0) throw BadArgs("matmul: ms must be a multiple of bs");
}

MatmulProblem::MatmulProblem(const MatmulParams& p) : p_(p) {
  p_.validate();
  const std::size_t n = p_.ms * p_.ms;
  a_.resize(n);
  b_.resize(n);
  c_.assign(n, 0.0);
  fill(a_, 12345u);
  fill(b_, 67890u);
}

void matmul_block(const double* a, const double* b, double* c, std::size_t bs) noexcept {
  for (std::size_t i = 0; i < bs; ++i) {
    for (std::size_t k = 0; k < bs; ++k) {
      const double aik = a[i * bs + k];
      for (std::size_t j = 0; j < bs; ++j) c[i * bs + j] += aik * b[k * bs + j];
    }
  }
}

void emit_matmul(const MatmulParams& p, TaskSink& sink, MatmulProblem* data) {
  p.validate();
  const std::size_t n = p.blocks();
  const std::size_t bs = p.bs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        TaskSpec t;
        t.label = "matmul_block";
        t.clauses = {in(block_token(kArrayA, i, k)), in(block_token(kArrayB, k, j)),
                     inout(block_token(kArrayC, i, j))};
        if (data) {
          t.body = [a = data->a(i, k), b = data->b(k, j), c = data->c(i, j), bs] {
            matmul_block(a, b, c, bs);
          };
        }
        sink.spawn(std::move(t));
      }
    }
  }
}

void matmul_reference(MatmulProblem& data) {
  const std::size_t n = data.params().blocks();
  const std::size_t bs = data.params().bs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) matmul_block(data.a(i, k), data.b(k, j), data.c(i, j), bs);
}

bool same_bits(const MatmulProblem& a, const MatmulProblem& b) noexcept {
  return a.result().size() == b.result().size() &&
         std::memcmp(a.result().data(), b.result().data(), a.result().size() * sizeof(double)) == 0;
}

}  // namespace taskrt::bench
