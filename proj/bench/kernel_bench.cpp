// Parallel kernels against their serial reference loops.
//   brt_kernel_bench [pixels] [repetitions]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "brt/benchmark.hpp"
#include "brt/kernels.hpp"
#include "brt/operators.hpp"

using namespace brt;

template <class F>
double median_seconds(int reps, F&& f) {
  std::vector<double> t;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return median(t);
}

int main(int argc, char** argv) {
  const std::size_t pixels = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 30000;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
  const ImageGrid grid = bench_grid(pixels);
  const auto pair = make_pair(kPi, kPi / 10);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(grid.size()), y(grid.size()), z(grid.size());
  for (double& v : x) v = u(rng);

  std::printf("grid %zux%zu, %d workers\n", grid.L1, grid.L2, workers());
  std::printf("%-28s %12s %12s %8s\n", "kernel", "parallel_s", "serial_s", "ratio");
  auto report = [](const char* name, double par, double ser) {
    std::printf("%-28s %12.4e %12.4e %8.2f\n", name, par, ser, ser / par);
  };

  double tp = median_seconds(reps, [&] { DirectOperator op(grid, pair, Exec::Parallel); });
  double ts = median_seconds(reps, [&] { DirectOperator op(grid, pair, Exec::Serial); });
  report("direct setup", tp, ts);

  const DirectOperator d(grid, pair);
  report("direct forward", median_seconds(reps, [&] { d.forward(x, y, Exec::Parallel); }),
         median_seconds(reps, [&] { d.forward(x, y, Exec::Serial); }));
  report("direct adjoint", median_seconds(reps, [&] { d.adjoint(x, z, Exec::Parallel); }),
         median_seconds(reps, [&] { d.adjoint(x, z, Exec::Serial); }));

  const FourierOperator f(grid, pair);
  report("fourier forward (ref=full)", median_seconds(reps, [&] { f.forward(x, y); }),
         median_seconds(reps, [&] { f.forward_reference(x, y); }));
  report("fourier adjoint (ref=full)", median_seconds(reps, [&] { f.adjoint(x, z); }),
         median_seconds(reps, [&] { f.adjoint_reference(x, z); }));
  return 0;
}
