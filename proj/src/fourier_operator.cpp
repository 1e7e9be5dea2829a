#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>
#include <tuple>

#include "brt/errors.hpp"
#include "fft_plans.hpp"

namespace brt {
namespace {

// FFTW's planner is not thread safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

using cplx = std::complex<double>;

long signed_index(std::size_t k, std::size_t N) {
  return k >= (N + 1) / 2 ? static_cast<long>(k) - static_cast<long>(N) : static_cast<long>(k);
}

// sin(πx)/(πx) given s = sin(πx) computed elsewhere.
double sinc_from(double s, double x) {
  const double px = kPi * x;
  if (std::abs(x) < 1e-6) return 1.0 - px * px / 6.0;
  return s / px;
}

}  // namespace

double sinc(double x) { return sinc_from(std::sin(kPi * x), x); }

std::complex<double> fbrt_response(double u, double v, double a_s, double a_d) {
  const cplx j(0.0, 1.0);
  const cplx e2s = std::polar(1.0, 2.0 * kPi * a_s * u);
  const cplx t1 = 2.0 * a_s * sinc(2.0 * a_s * u) * e2s;
  const cplx t2 = a_s * sinc(a_s * u) * std::polar(1.0, 5.0 * kPi * a_s * u) *
                  std::polar(1.0, 2.0 * kPi * a_d * v);
  const cplx t3 = (2.0 * a_d / j) * std::sin(2.0 * kPi * a_s * u) * sinc(a_d * v) * e2s *
                  std::polar(1.0, kPi * a_d * v);
  return t1 + t2 + t3;
}

FourierOperator::Plans::Plans(std::size_t l1, std::size_t l2, std::size_t n1, std::size_t n2)
    : L1(l1), L2(l2), N1(n1), N2(n2), M(n1 / 2 + 1) {
  fft::Buffer<double> rows(L2 * N1);
  fft::Buffer<fftw_complex> spec(N2 * M);
  const int n1i = static_cast<int>(N1), n2i = static_cast<int>(N2);
  const int Mi = static_cast<int>(M), L2i = static_cast<int>(L2);
  std::lock_guard lock(planner_mutex());
  r2c_rows = fftw_plan_many_dft_r2c(1, &n1i, L2i, rows.data(), nullptr, 1, n1i, spec.data(),
                                    nullptr, 1, Mi, FFTW_ESTIMATE);
  cols_fwd = fftw_plan_many_dft(1, &n2i, Mi, spec.data(), nullptr, Mi, 1, spec.data(), nullptr,
                                Mi, 1, FFTW_FORWARD, FFTW_ESTIMATE);
  cols_bwd = fftw_plan_many_dft(1, &n2i, Mi, spec.data(), nullptr, Mi, 1, spec.data(), nullptr,
                                Mi, 1, FFTW_BACKWARD, FFTW_ESTIMATE);
  c2r_rows = fftw_plan_many_dft_c2r(1, &n1i, L2i, spec.data(), nullptr, 1, Mi, rows.data(),
                                    nullptr, 1, n1i, FFTW_ESTIMATE);
  if (!r2c_rows || !cols_fwd || !cols_bwd || !c2r_rows)
    throw Error("FFTW could not create a plan");
}

FourierOperator::Plans::~Plans() {
  std::lock_guard lock(planner_mutex());
  for (fftw_plan p : {r2c_rows, cols_fwd, cols_bwd, c2r_rows})
    if (p) fftw_destroy_plan(p);
}

namespace fft {

void forward_spectrum(const FourierOperator::Plans& p, std::span<const double> img, Workspace& ws) {
  double* rows = ws.rows.data();
  for (std::size_t r = 0; r < p.L2; ++r) {
    double* dst = rows + r * p.N1;
    std::copy_n(img.data() + r * p.L1, p.L1, dst);
    std::fill(dst + p.L1, dst + p.N1, 0.0);
  }
  fftw_complex* spec = ws.spec.data();
  fftw_execute_dft_r2c(p.r2c_rows, rows, spec);
  std::fill(ws.spectrum() + p.L2 * p.M, ws.spectrum() + p.N2 * p.M, cplx(0.0, 0.0));
  fftw_execute_dft(p.cols_fwd, spec, spec);
}

void inverse_crop(const FourierOperator::Plans& p, Workspace& ws, std::span<double> out) {
  fftw_complex* spec = ws.spec.data();
  fftw_execute_dft(p.cols_bwd, spec, spec);
  double* rows = ws.rows.data();
  fftw_execute_dft_c2r(p.c2r_rows, spec, rows);
  const double scale = 1.0 / (static_cast<double>(p.N1) * static_cast<double>(p.N2));
  for (std::size_t r = 0; r < p.L2; ++r)
    for (std::size_t c = 0; c < p.L1; ++c) out[r * p.L1 + c] = rows[r * p.N1 + c] * scale;
}

}  // namespace fft

FourierOperator::FourierOperator(const ImageGrid& grid, const SourceDetectorPair& pair,
                                 std::size_t extra_rows)
    : BrtOperator(grid, pair) {
  std::tie(a_s_, a_d_) = spreading_factors(pair, grid);
  // The padded periodic construction keeps the wrapped detector segment out
  // of the image only when the two rays leave toward opposite sides.
  if (!(pair.theta_s.dot(pair.theta_d) < -kAlignTol))
    throw DegenerateAngleError("Fourier operator needs a forward-scatter pair (θs·θd < 0)");
  std::tie(N1_, N2_) = padded_dims(pair, grid);
  N2_ += extra_rows;

  // Every exponential in the response factors into a k1 part times a k2
  // part, so the trigonometry is tabulated per axis.
  const Direction s = pair.theta_s, d = pair.theta_d;
  std::vector<double> w1(N1_), w2(N2_);
  for (std::size_t k = 0; k < N1_; ++k)
    w1[k] = static_cast<double>(signed_index(k, N1_)) / (static_cast<double>(N1_) * grid.delta1);
  for (std::size_t k = 0; k < N2_; ++k)
    w2[k] = static_cast<double>(signed_index(k, N2_)) / (static_cast<double>(N2_) * grid.delta2);
  std::vector<cplx> ps1(N1_), pd1(N1_), ps2(N2_), pd2(N2_);
  for (std::size_t k = 0; k < N1_; ++k) {
    ps1[k] = std::polar(1.0, kPi * a_s_ * w1[k] * s.ux);
    pd1[k] = std::polar(1.0, kPi * a_d_ * w1[k] * d.ux);
  }
  for (std::size_t k = 0; k < N2_; ++k) {
    ps2[k] = std::polar(1.0, kPi * a_s_ * w2[k] * s.uy);
    pd2[k] = std::polar(1.0, kPi * a_d_ * w2[k] * d.uy);
  }

  filter_.resize(N1_ * N2_);
  const double as = a_s_, ad = a_d_;
#pragma omp parallel for schedule(static)
  for (std::size_t k2 = 0; k2 < N2_; ++k2) {
    for (std::size_t k1 = 0; k1 < N1_; ++k1) {
      const double u = w1[k1] * s.ux + w2[k2] * s.uy;
      const double v = w1[k1] * d.ux + w2[k2] * d.uy;
      const cplx e1 = ps1[k1] * ps2[k2];  // e^{jπ a_s u}
      const cplx e2 = e1 * e1;            // e^{j2π a_s u}
      const cplx e5 = e2 * e2 * e1;       // e^{j5π a_s u}
      const cplx q1 = pd1[k1] * pd2[k2];  // e^{jπ a_d v}
      const cplx q2 = q1 * q1;
      const double sin2 = e2.imag();
      const cplx t1 = 2.0 * as * sinc_from(sin2, 2.0 * as * u) * e2;
      const cplx t2 = as * sinc_from(e1.imag(), as * u) * e5 * q2;
      const cplx t3 = cplx(0.0, -2.0 * ad) * sin2 * sinc_from(q1.imag(), ad * v) * e2 * q1;
      filter_[k2 * N1_ + k1] = t1 + t2 + t3;
    }
  }

  // Real part of the filtered inverse = inverse with the Hermitian part of
  // the filter, which lets the transforms run on the half spectrum.
  const std::size_t M = N1_ / 2 + 1;
  half_.resize(N2_ * M);
  for (std::size_t k2 = 0; k2 < N2_; ++k2) {
    const std::size_t m2 = (N2_ - k2) % N2_;
    for (std::size_t k1 = 0; k1 < M; ++k1) {
      const std::size_t m1 = (N1_ - k1) % N1_;
      half_[k2 * M + k1] = 0.5 * (filter_[k2 * N1_ + k1] + std::conj(filter_[m2 * N1_ + m1]));
    }
  }
  plans_ = std::make_shared<const Plans>(grid.L1, grid.L2, N1_, N2_);
}

FourierOperator::~FourierOperator() = default;

std::size_t FourierOperator::memory_bytes() const {
  return (filter_.size() + half_.size()) * sizeof(cplx);
}

namespace {

void check_span(std::span<const double> a, std::span<double> b, std::size_t n) {
  if (a.size() != n || b.size() != n)
    throw GridMismatch("operator input/output size does not match grid (" + std::to_string(n) + ")");
}

}  // namespace

void FourierOperator::forward(std::span<const double> mu, std::span<double> out) const {
  check_span(mu, out, grid_.size());
  fft::Workspace ws(*plans_);
  fft::forward_spectrum(*plans_, mu, ws);
  cplx* X = ws.spectrum();
  for (std::size_t k = 0; k < half_.size(); ++k) X[k] *= half_[k];
  fft::inverse_crop(*plans_, ws, out);
}

void FourierOperator::adjoint(std::span<const double> p, std::span<double> out) const {
  check_span(p, out, grid_.size());
  fft::Workspace ws(*plans_);
  fft::forward_spectrum(*plans_, p, ws);
  cplx* X = ws.spectrum();
  for (std::size_t k = 0; k < half_.size(); ++k) X[k] *= std::conj(half_[k]);
  fft::inverse_crop(*plans_, ws, out);
}

namespace {

void reference_apply(const FourierOperator& op, const std::vector<cplx>& filt, bool conj_filter,
                     std::span<const double> in, std::span<double> out) {
  const std::size_t N1 = op.N1(), N2 = op.N2(), L1 = op.grid().L1, L2 = op.grid().L2;
  fft::Buffer<fftw_complex> buf(N1 * N2);
  auto* z = reinterpret_cast<cplx*>(buf.data());
  std::fill(z, z + N1 * N2, cplx(0.0, 0.0));
  for (std::size_t r = 0; r < L2; ++r)
    for (std::size_t c = 0; c < L1; ++c) z[r * N1 + c] = in[r * L1 + c];
  fftw_plan fwd, bwd;
  {
    std::lock_guard lock(planner_mutex());
    fwd = fftw_plan_dft_2d(static_cast<int>(N2), static_cast<int>(N1), buf.data(), buf.data(),
                           FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(static_cast<int>(N2), static_cast<int>(N1), buf.data(), buf.data(),
                           FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  for (std::size_t k = 0; k < N1 * N2; ++k) z[k] *= conj_filter ? std::conj(filt[k]) : filt[k];
  fftw_execute(bwd);
  const double scale = 1.0 / (static_cast<double>(N1) * static_cast<double>(N2));
  for (std::size_t r = 0; r < L2; ++r)
    for (std::size_t c = 0; c < L1; ++c) out[r * L1 + c] = z[r * N1 + c].real() * scale;
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
}

}  // namespace

void FourierOperator::forward_reference(std::span<const double> mu, std::span<double> out) const {
  check_span(mu, out, grid_.size());
  reference_apply(*this, filter_, false, mu, out);
}

void FourierOperator::adjoint_reference(std::span<const double> p, std::span<double> out) const {
  check_span(p, out, grid_.size());
  reference_apply(*this, filter_, true, p, out);
}

std::unique_ptr<FourierOperator> build_fourier(const ImageGrid& grid, const SourceDetectorPair& pair,
                                               std::size_t extra_rows) {
  return std::make_unique<FourierOperator>(grid, pair, extra_rows);
}

SinogramData apply_forward(const BrtOperator& op, const Image& mu, std::size_t pair_index) {
  if (!(mu.grid == op.grid())) throw GridMismatch("image grid differs from operator grid");
  SinogramData s{pair_index, op.grid(), std::vector<double>(op.grid().size())};
  op.forward(mu.values, s.values);
  return s;
}

Image apply_adjoint(const BrtOperator& op, const SinogramData& p) {
  if (!(p.grid == op.grid())) throw GridMismatch("sinogram grid differs from operator grid");
  Image out(op.grid(), ImageKind::Attenuation);
  op.adjoint(p.values, out.values);
  return out;
}

}  // namespace brt
