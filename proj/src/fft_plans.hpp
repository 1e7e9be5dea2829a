#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include <fftw3.h>

#include "brt/operators.hpp"

namespace brt {

/// FFTW plans for the pruned padded transform of an L2×L1 image embedded in
/// an N2×N1 zero-padded array. Only the L2 nonzero rows go through the row
/// transforms; columns run over the N1/2+1 half-spectrum bins.
struct FourierOperator::Plans {
  std::size_t L1, L2, N1, N2, M;
  fftw_plan r2c_rows = nullptr;
  fftw_plan cols_fwd = nullptr;
  fftw_plan cols_bwd = nullptr;
  fftw_plan c2r_rows = nullptr;

  Plans(std::size_t l1, std::size_t l2, std::size_t n1, std::size_t n2);
  ~Plans();
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

namespace fft {

template <class T>
struct Buffer {
  T* ptr = nullptr;
  std::size_t n = 0;
  explicit Buffer(std::size_t count) : n(count) {
    ptr = static_cast<T*>(fftw_malloc(sizeof(T) * (count ? count : 1)));
    if (!ptr) throw std::bad_alloc();
  }
  ~Buffer() { fftw_free(ptr); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  T* data() { return ptr; }
};

/// Scratch arrays for one transform.
struct Workspace {
  Buffer<double> rows;         // L2 × N1 real
  Buffer<fftw_complex> spec;   // N2 × M half spectrum
  explicit Workspace(const FourierOperator::Plans& p) : rows(p.L2 * p.N1), spec(p.N2 * p.M) {}
  std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(spec.data()); }
};

/// ws.spec ← DFT of the zero-padded image.
void forward_spectrum(const FourierOperator::Plans& p, std::span<const double> img, Workspace& ws);
/// out ← cropped real inverse DFT of ws.spec, scaled by 1/(N1·N2). Destroys ws.spec.
void inverse_crop(const FourierOperator::Plans& p, Workspace& ws, std::span<double> out);

}  // namespace fft
}  // namespace brt
