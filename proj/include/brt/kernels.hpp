#pragma once

#include <array>
#include <cstddef>

namespace brt {

/// Selects between the OpenMP kernels and the serial reference loops they
/// are tested against.
enum class Exec { Parallel, Serial };

/// Worker count used by parallel kernels; 0 keeps the OpenMP default.
void set_workers(int n);
int workers();

/// Number of fixed reduction chunks. Parallel reductions split work into this
/// many pieces and combine them in order, so results do not depend on the
/// number of threads.
inline constexpr std::size_t kReductionChunks = 16;

/// Σ_{k<n} term(k), accumulated in kReductionChunks contiguous pieces that
/// are combined in order.
template <class Term>
double ordered_sum(std::size_t n, Term&& term) {
  std::array<double, kReductionChunks> part{};
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t c = 0; c < kReductionChunks; ++c) {
    const std::size_t k0 = c * n / kReductionChunks, k1 = (c + 1) * n / kReductionChunks;
    double s = 0.0;
    for (std::size_t k = k0; k < k1; ++k) s += term(k);
    part[c] = s;
  }
  double s = 0.0;
  for (double p : part) s += p;
  return s;
}

}  // namespace brt
