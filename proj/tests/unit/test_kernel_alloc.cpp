// Allocation accounting for the matrix-free product. The allocator is
// interposed here, which is why this test is its own binary.

#include "kryreg/kernel.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <random>

namespace {
std::atomic<std::size_t> g_bytes{0};
std::atomic<std::size_t> g_largest{0};

void note(std::size_t n) {
  g_bytes += n;
  std::size_t cur = g_largest.load();
  while (n > cur && !g_largest.compare_exchange_weak(cur, n)) {
  }
}
}  // namespace

// Eigen and the standard library both end up in malloc, so counting there
// sees every heap allocation (glibc lets the executable interpose these).
extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);

void* malloc(std::size_t n) {
  note(n);
  return __libc_malloc(n);
}
void* calloc(std::size_t c, std::size_t n) {
  note(c * n);
  return __libc_calloc(c, n);
}
void* realloc(void* p, std::size_t n) {
  note(n);
  return __libc_realloc(p, n);
}
}

using namespace kryreg;

TEST(KernelMvpMemory, WorkingStorageIsLinearInN) {
  const Index n = 3000;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix p(3, n);
  for (Index i = 0; i < p.size(); ++i) p.data()[i] = u(gen);
  Vector q(n);
  for (Index i = 0; i < n; ++i) q(i) = u(gen);
  const KernelOperator op(Dataset(p), {KernelFamily::Gaussian, 0.5, 1e-3});
  Vector out(n);
  op.apply(q, out);  // warm up the thread pool

  for (Precision prec : {Precision::Full, Precision::Reduced}) {
    const KernelOperator view = op.with_precision(prec);
    g_bytes = 0;
    g_largest = 0;
    view.apply(q, out);
    const std::size_t workers = static_cast<std::size_t>(worker_count());
    // Two length-N buffers per worker plus a rounded copy of q.
    const std::size_t budget = (2 * workers + 2) * static_cast<std::size_t>(n) * sizeof(double) + 4096;
    EXPECT_LE(g_bytes.load(), budget) << to_string(prec);
    EXPECT_LT(g_largest.load(), static_cast<std::size_t>(n) * n * sizeof(float) / 100);
  }
}
