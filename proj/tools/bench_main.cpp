// Times the OpenMP kernels against their serial reference twins on shapes
// representative of the training loop (MNIST-sized batches through a small
// MLP) and prints one table row per primitive. The two implementations are
// bitwise-identical by construction, so the interesting output is purely the
// wall-clock ratio; on a single-core machine it hovers around 1x and the
// speedup column only becomes meaningful with more cores.
//
// usage: vmf_bench [batch_rows] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vmf/kernels.hpp"
#include "vmf/rng.hpp"

using namespace vmf;
using clock_type = std::chrono::steady_clock;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

double time_loop(const std::function<void()>& fn, int repeats) {
  fn();  // warm up, also faults in the output allocation path
  const auto start = clock_type::now();
  for (int i = 0; i < repeats; ++i) fn();
  const std::chrono::duration<double> elapsed = clock_type::now() - start;
  return elapsed.count() / repeats;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-16s %10.3f us %12.3f us %8.2fx\n", name, serial * 1e6,
              parallel * 1e6, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4096;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 20;
  if (n == 0 || repeats <= 0) {
    std::fprintf(stderr, "usage: vmf_bench [batch_rows] [repeats]\n");
    return 2;
  }

  // Shapes mirror one SGD step on image data: 784-wide input, 256-wide
  // hidden layer, 16-dimensional embedding, 10 classes.
  const std::size_t d_in = 784, d_hidden = 256, d_out = 16, classes = 10;

  Rng rng(1);
  const Matrix X = random_matrix(rng, n, d_in);
  const Matrix W1 = random_matrix(rng, d_in, d_hidden);
  const Matrix H = random_matrix(rng, n, d_hidden);
  const Matrix W2 = random_matrix(rng, d_hidden, d_out);
  const Matrix Z = random_matrix(rng, n, d_out);
  const Matrix G = random_matrix(rng, n, d_hidden);
  const Matrix P = random_matrix(rng, classes, d_out);
  std::vector<double> bias(d_hidden);
  for (double& b : bias) b = rng.normal();

#ifdef _OPENMP
  std::printf("threads: %d, batch rows: %zu, repeats: %d\n",
              omp_get_max_threads(), n, repeats);
#else
  std::printf("threads: 1 (OpenMP off), batch rows: %zu, repeats: %d\n", n,
              repeats);
#endif
  std::printf("%-16s %13s %15s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  Matrix out;
  std::vector<double> vec;

  report("affine",
         time_loop([&] { reference::affine(X, W1, bias, out); }, repeats),
         time_loop([&] { kernels::affine(X, W1, bias, out); }, repeats));
  report("matmul_tn",
         time_loop([&] { reference::matmul_tn(H, G, out); }, repeats),
         time_loop([&] { kernels::matmul_tn(H, G, out); }, repeats));
  report("matmul_nt",
         time_loop([&] { reference::matmul_nt(Z, P, out); }, repeats),
         time_loop([&] { kernels::matmul_nt(Z, P, out); }, repeats));
  report("column_sums",
         time_loop([&] { reference::column_sums(G, vec); }, repeats),
         time_loop([&] { kernels::column_sums(G, vec); }, repeats));
  report("normalize_rows",
         time_loop([&] { reference::normalize_rows(Z, out, vec); }, repeats),
         time_loop([&] { kernels::normalize_rows(Z, out, vec); }, repeats));
  report("apply_tanh",
         time_loop([&] { reference::apply_tanh(H, out); }, repeats),
         time_loop([&] { kernels::apply_tanh(H, out); }, repeats));
  report("tanh_backward",
         time_loop([&] { reference::tanh_backward(H, G, out); }, repeats),
         time_loop([&] { kernels::tanh_backward(H, G, out); }, repeats));
  report("apply_relu",
         time_loop([&] { reference::apply_relu(H, out); }, repeats),
         time_loop([&] { kernels::apply_relu(H, out); }, repeats));
  report("relu_backward",
         time_loop([&] { reference::relu_backward(H, G, out); }, repeats),
         time_loop([&] { kernels::relu_backward(H, G, out); }, repeats));
  report("softmax_rows",
         time_loop([&] { reference::softmax_rows(Z, out); }, repeats),
         time_loop([&] { kernels::softmax_rows(Z, out); }, repeats));
  return 0;
}
