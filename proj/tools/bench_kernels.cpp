// Times the serial reference kernels against the OpenMP ones and verifies
// bitwise agreement on each case.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "graphtax/kernels.hpp"

using namespace graphtax;

namespace {

Tensor random_tensor(int rows, int cols, std::mt19937_64& rng) {
  Tensor t(rows, cols);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& x : t.data) x = u(rng);
  return t;
}

template <typename F>
double time_ms(F&& fn, int reps) {
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  std::mt19937_64 rng(7);
  std::printf("threads: %d\n\n", omp_get_max_threads());
  std::printf("%-28s %10s %10s %8s %6s\n", "case", "serial ms", "openmp ms", "speedup",
              "equal");

  for (int n : {64, 128, 256, 512}) {
    Tensor a = random_tensor(n, n, rng);
    Tensor b = random_tensor(n, n, rng);
    Tensor out_ref(n, n), out_omp(n, n);
    int reps = n <= 128 ? 20 : 5;
    double tr = time_ms([&] { ref::matmul(a, b, out_ref); }, reps);
    double to = time_ms([&] { kernels::matmul(a, b, out_omp); }, reps);
    char name[64];
    std::snprintf(name, sizeof(name), "matmul %dx%d", n, n);
    std::printf("%-28s %10.3f %10.3f %8.2fx %6s\n", name, tr, to, tr / to,
                out_ref == out_omp ? "yes" : "NO");
  }

  for (int graphs : {32, 128}) {
    const int n = 24, cols = 64;
    std::vector<Tensor> blocks;
    BatchLayout layout;
    layout.offsets.push_back(0);
    for (int g = 0; g < graphs; ++g) {
      Tensor blk = random_tensor(n, n, rng);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) blk.at(i, j) = blk.at(j, i);
      blocks.push_back(std::move(blk));
      layout.offsets.push_back(layout.offsets.back() + n);
    }
    Tensor h = random_tensor(layout.total_rows(), cols, rng);
    Tensor out_ref(h.rows, cols), out_omp(h.rows, cols);
    double tr = time_ms([&] { ref::block_diag_mul(blocks, layout, h, out_ref); }, 20);
    double to = time_ms([&] { kernels::block_diag_mul(blocks, layout, h, out_omp); }, 20);
    char name[64];
    std::snprintf(name, sizeof(name), "block_diag %d x (%dx%d)", graphs, n, n);
    std::printf("%-28s %10.3f %10.3f %8.2fx %6s\n", name, tr, to, tr / to,
                out_ref == out_omp ? "yes" : "NO");
  }
  return 0;
}
