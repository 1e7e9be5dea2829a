#pragma once

#include <functional>
#include <string>
#include <vector>

#include "brt/geometry.hpp"
#include "brt/operators.hpp"

namespace brt {

/// Grid with about `pixels` samples on a 1.5 × 2 support (L1 : L2 = 3 : 4).
ImageGrid bench_grid(std::size_t pixels);

/// `count` scatter pairs sharing the source at 180°, detectors at ±18°, ±15°,
/// ±12°, ±9° taken in that order.
std::vector<SourceDetectorPair> bench_pairs(std::size_t count);

struct BenchSettings {
  std::vector<std::size_t> sizes = {30000, 120000, 480000};
  std::vector<std::size_t> pair_counts = {1, 2, 4, 8};
  std::vector<OperatorChoice> realizations = {OperatorChoice::Direct, OperatorChoice::Fourier};
  int repetitions = 5;
  double memory_budget_bytes = 0.0;  // 0: 85% of MemAvailable
  int workers = 0;
  double lambda = 2e-3;
};

/// One timing row; times are medians in seconds.
struct BenchRow {
  std::size_t pixels = 0;
  std::size_t L1 = 0, L2 = 0;
  std::size_t pairs = 0;
  OperatorChoice realization = OperatorChoice::Direct;
  int workers = 0;
  bool skipped = false;  // operator would not fit in the memory budget
  double setup_s = 0, forward_s = 0, adjoint_s = 0, scatter_update_s = 0, attenuation_update_s = 0;
};

/// Bytes the operator set would occupy.
double estimate_operator_bytes(const ImageGrid& grid, const std::vector<SourceDetectorPair>& pairs,
                               OperatorChoice choice);

/// MemAvailable from /proc/meminfo, or 0 when it cannot be read.
double available_memory_bytes();

double median(std::vector<double> v);

std::vector<BenchRow> run_benchmark(const BenchSettings& s,
                                    const std::function<void(const BenchRow&)>& on_row = {});

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& r);

}  // namespace brt
