#include <cstring>

#include "taskrt/bench/workloads.hpp"

namespace taskrt::bench {

namespace {

constexpr std::uint32_t kArrayLu = 6;

}  // namespace

bool initially_present(SparsityPattern pattern, std::size_t i, std::size_t j) noexcept {
  switch (pattern) {
    case SparsityPattern::Dense: return true;
    case SparsityPattern::DiagonalOnly: return i == j;
    case SparsityPattern::Default:
      return i == j || (i < j && i % 3 != 0) || (i > j && j % 3 != 0);
  }
  return false;
}

void SparseLuParams::validate() const {
  if (bs == 0 || ms == 0) throw BadArgs("sparselu: ms and bs must be positive");
  if (ms % bs != 0) throw BadArgs("sparselu: ms must be a multiple of bs");
}

SparseLuProblem::SparseLuProblem(const SparseLuParams& p) : p_(p) {
  p_.validate();
  const std::size_t n = p_.blocks();
  const std::size_t bs = p_.bs;
  blocks_.resize(n * n);
  std::uint32_t seed = 1325;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!initially_present(p_.pattern, i, j)) continue;
      double* blk = allocate(i, j);
      for (std::size_t k = 0; k < bs * bs; ++k) {
        seed = (3125 * seed) % 65536;
        blk[k] = (static_cast<double>(seed) - 32768.0) / 16384.0;
      }
      // Diagonal dominance keeps the factorization stable without pivoting.
      if (i == j) {
        for (std::size_t k = 0; k < bs; ++k) blk[k * bs + k] += 4.0 * static_cast<double>(p_.ms);
      }
    }
  }
}

double* SparseLuProblem::allocate(std::size_t i, std::size_t j) {
  auto& slot = blocks_[i * p_.blocks() + j];
  if (!slot) {
    slot = std::make_unique<double[]>(p_.bs * p_.bs);
    std::memset(slot.get(), 0, p_.bs * p_.bs * sizeof(double));
  }
  return slot.get();
}

void lu0(double* diag, std::size_t bs) noexcept {
  for (std::size_t k = 0; k < bs; ++k) {
    for (std::size_t i = k + 1; i < bs; ++i) {
      diag[i * bs + k] = diag[i * bs + k] / diag[k * bs + k];
      for (std::size_t j = k + 1; j < bs; ++j) diag[i * bs + j] -= diag[i * bs + k] * diag[k * bs + j];
    }
  }
}

void fwd(const double* diag, double* col, std::size_t bs) noexcept {
  for (std::size_t k = 0; k < bs; ++k)
    for (std::size_t i = k + 1; i < bs; ++i)
      for (std::size_t j = 0; j < bs; ++j) col[i * bs + j] -= diag[i * bs + k] * col[k * bs + j];
}

void bdiv(const double* diag, double* row, std::size_t bs) noexcept {
  for (std::size_t i = 0; i < bs; ++i) {
    for (std::size_t k = 0; k < bs; ++k) {
      row[i * bs + k] = row[i * bs + k] / diag[k * bs + k];
      for (std::size_t j = k + 1; j < bs; ++j) row[i * bs + j] -= row[i * bs + k] * diag[k * bs + j];
    }
  }
}

void bmod(const double* row, const double* col, double* inner, std::size_t bs) noexcept {
  for (std::size_t i = 0; i < bs; ++i)
    for (std::size_t j = 0; j < bs; ++j) {
      double acc = inner[i * bs + j];
      for (std::size_t k = 0; k < bs; ++k) acc -= row[i * bs + k] * col[k * bs + j];
      inner[i * bs + j] = acc;
    }
}

void emit_sparselu(const SparseLuParams& p, TaskSink& sink, SparseLuProblem* data) {
  p.validate();
  const std::size_t n = p.blocks();
  const std::size_t bs = p.bs;

  std::vector<char> present(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) present[i * n + j] = initially_present(p.pattern, i, j);
  auto has = [&](std::size_t i, std::size_t j) { return present[i * n + j] != 0; };
  auto tok = [](std::size_t i, std::size_t j) { return block_token(kArrayLu, i, j); };
  auto blk = [&](std::size_t i, std::size_t j) { return data ? data->block(i, j) : nullptr; };

  for (std::size_t kk = 0; kk < n; ++kk) {
    {
      TaskSpec t{"lu0", {inout(tok(kk, kk))}, {}};
      if (data) t.body = [d = blk(kk, kk), bs] { lu0(d, bs); };
      sink.spawn(std::move(t));
    }
    for (std::size_t jj = kk + 1; jj < n; ++jj) {
      if (!has(kk, jj)) continue;
      TaskSpec t{"fwd", {in(tok(kk, kk)), inout(tok(kk, jj))}, {}};
      if (data) t.body = [d = blk(kk, kk), c = blk(kk, jj), bs] { fwd(d, c, bs); };
      sink.spawn(std::move(t));
    }
    for (std::size_t ii = kk + 1; ii < n; ++ii) {
      if (!has(ii, kk)) continue;
      TaskSpec t{"bdiv", {in(tok(kk, kk)), inout(tok(ii, kk))}, {}};
      if (data) t.body = [d = blk(kk, kk), r = blk(ii, kk), bs] { bdiv(d, r, bs); };
      sink.spawn(std::move(t));
    }
    for (std::size_t ii = kk + 1; ii < n; ++ii) {
      if (!has(ii, kk)) continue;
      for (std::size_t jj = kk + 1; jj < n; ++jj) {
        if (!has(kk, jj)) continue;
        if (!has(ii, jj)) {
          present[ii * n + jj] = 1;
          if (data) data->allocate(ii, jj);
        }
        TaskSpec t{"bmod", {in(tok(ii, kk)), in(tok(kk, jj)), inout(tok(ii, jj))}, {}};
        if (data) {
          t.body = [r = blk(ii, kk), c = blk(kk, jj), x = blk(ii, jj), bs] { bmod(r, c, x, bs); };
        }
        sink.spawn(std::move(t));
      }
    }
  }
}

void sparselu_reference(SparseLuProblem& data) {
  const std::size_t n = data.params().blocks();
  const std::size_t bs = data.params().bs;
  for (std::size_t kk = 0; kk < n; ++kk) {
    lu0(data.block(kk, kk), bs);
    for (std::size_t jj = kk + 1; jj < n; ++jj)
      if (data.block(kk, jj)) fwd(data.block(kk, kk), data.block(kk, jj), bs);
    for (std::size_t ii = kk + 1; ii < n; ++ii)
      if (data.block(ii, kk)) bdiv(data.block(kk, kk), data.block(ii, kk), bs);
    for (std::size_t ii = kk + 1; ii < n; ++ii) {
      if (!data.block(ii, kk)) continue;
      for (std::size_t jj = kk + 1; jj < n; ++jj) {
        if (!data.block(kk, jj)) continue;
        bmod(data.block(ii, kk), data.block(kk, jj), data.allocate(ii, jj), bs);
      }
    }
  }
}

bool same_bits(const SparseLuProblem& a, const SparseLuProblem& b) noexcept {
  const std::size_t n = a.params().blocks();
  const std::size_t bs = a.params().bs;
  if (n != b.params().blocks() || bs != b.params().bs) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* x = a.block(i, j);
      const double* y = b.block(i, j);
      if ((x == nullptr) != (y == nullptr)) return false;
      if (x && std::memcmp(x, y, bs * bs * sizeof(double)) != 0) return false;
    }
  }
  return true;
}

}  // namespace taskrt::bench
