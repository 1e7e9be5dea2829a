#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "brt/geometry.hpp"
#include "brt/kernels.hpp"

namespace brt {

enum class Realization { Direct, Fourier };

/// Data for one pair, indexed by scatter location y on the image lattice.
struct SinogramData {
  std::size_t pair_index = 0;
  ImageGrid grid;
  std::vector<double> values;
};

/// Discrete broken-ray transform h_i(y|x) for one source-detector pair.
class BrtOperator {
 public:
  BrtOperator(const ImageGrid& grid, const SourceDetectorPair& pair) : grid_(grid), pair_(pair) {}
  virtual ~BrtOperator() = default;

  const ImageGrid& grid() const { return grid_; }
  const SourceDetectorPair& pair() const { return pair_; }
  virtual Realization realization() const = 0;

  /// out = B·mu; both spans have grid().size() entries.
  virtual void forward(std::span<const double> mu, std::span<double> out) const = 0;
  /// out = Bᵀ·p.
  virtual void adjoint(std::span<const double> p, std::span<double> out) const = 0;
  /// Bytes held by the operator's tables.
  virtual std::size_t memory_bytes() const = 0;

 protected:
  ImageGrid grid_;
  SourceDetectorPair pair_;
};

/// Ray-traced sparse operator stored as compressed rows (one row per y).
class DirectOperator final : public BrtOperator {
 public:
  DirectOperator(const ImageGrid& grid, const SourceDetectorPair& pair, Exec exec = Exec::Parallel);

  Realization realization() const override { return Realization::Direct; }
  void forward(std::span<const double> mu, std::span<double> out) const override;
  void adjoint(std::span<const double> p, std::span<double> out) const override;
  std::size_t memory_bytes() const override;

  void forward(std::span<const double> mu, std::span<double> out, Exec exec) const;
  void adjoint(std::span<const double> p, std::span<double> out, Exec exec) const;

  std::size_t nnz() const { return cols_.size(); }
  double row_sum(std::size_t y) const;
  /// Weights of row y as (column, h) pairs, columns ascending.
  std::vector<std::pair<std::size_t, double>> row(std::size_t y) const;

  /// Nonzero count per row without materializing the weights.
  static std::uint64_t estimate_nnz(const ImageGrid& grid, const SourceDetectorPair& pair);

 private:
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
};

/// Fourier-domain operator: zero pad, filter with the sampled broken-ray
/// frequency response, crop.
class FourierOperator final : public BrtOperator {
 public:
  /// extra_rows adds vertical zero padding beyond the minimum.
  FourierOperator(const ImageGrid& grid, const SourceDetectorPair& pair, std::size_t extra_rows = 0);
  ~FourierOperator() override;
  FourierOperator(const FourierOperator&) = delete;
  FourierOperator& operator=(const FourierOperator&) = delete;

  Realization realization() const override { return Realization::Fourier; }
  void forward(std::span<const double> mu, std::span<double> out) const override;
  void adjoint(std::span<const double> p, std::span<double> out) const override;
  std::size_t memory_bytes() const override;

  /// Unpruned full complex transform, taking the real part at the end.
  /// Slow; kept to test the half-spectrum path against.
  void forward_reference(std::span<const double> mu, std::span<double> out) const;
  void adjoint_reference(std::span<const double> p, std::span<double> out) const;

  std::size_t N1() const { return N1_; }
  std::size_t N2() const { return N2_; }
  double a_s() const { return a_s_; }
  double a_d() const { return a_d_; }
  /// Filter sample at DFT bin (k2, k1).
  std::complex<double> filter(std::size_t k2, std::size_t k1) const { return filter_[k2 * N1_ + k1]; }

  // Pieces used by OperatorSet to share transforms among operators of equal size.
  struct Plans;
  const Plans& plans() const { return *plans_; }
  /// Half spectrum of the real part of the filter action, N2 × (N1/2+1).
  const std::vector<std::complex<double>>& half_filter() const { return half_; }

 private:
  std::size_t N1_ = 0, N2_ = 0;
  double a_s_ = 0.0, a_d_ = 0.0;
  std::vector<std::complex<double>> filter_;
  std::vector<std::complex<double>> half_;
  std::shared_ptr<const Plans> plans_;
};

/// Frequency response of the broken-ray filter at u = w·θs, v = w·θd.
std::complex<double> fbrt_response(double u, double v, double a_s, double a_d);
/// sin(πx)/(πx), with the series used near zero.
double sinc(double x);

std::unique_ptr<DirectOperator> build_direct(const ImageGrid& grid, const SourceDetectorPair& pair);
std::unique_ptr<FourierOperator> build_fourier(const ImageGrid& grid, const SourceDetectorPair& pair,
                                               std::size_t extra_rows = 0);

SinogramData apply_forward(const BrtOperator& op, const Image& mu, std::size_t pair_index = 0);
Image apply_adjoint(const BrtOperator& op, const SinogramData& p);

/// Operators for every pair of a measurement geometry on one grid.
///
/// Fourier operators with equal padded size share the transform of the
/// input image in forward_all and a single inverse transform in adjoint_sum.
class OperatorSet {
 public:
  OperatorSet() = default;
  OperatorSet(const ImageGrid& grid, std::vector<std::unique_ptr<BrtOperator>> ops);

  std::size_t size() const { return ops_.size(); }
  const ImageGrid& grid() const { return grid_; }
  const BrtOperator& operator[](std::size_t i) const { return *ops_[i]; }

  /// out[i] = B_i·mu.
  void forward_all(std::span<const double> mu, std::vector<std::vector<double>>& out) const;
  /// Σ_i B_iᵀ p[i]; entries of p may be empty to skip a pair.
  void adjoint_sum(const std::vector<std::vector<double>>& p, std::span<double> out) const;
  /// Largest row sum over all pairs and scatter locations.
  double row_sum_max() const;

 private:
  struct Group {
    std::vector<std::size_t> members;  // indices of Fourier operators sharing N1×N2
  };
  ImageGrid grid_;
  std::vector<std::unique_ptr<BrtOperator>> ops_;
  std::vector<std::size_t> direct_;
  std::vector<Group> groups_;
};

enum class OperatorChoice { Direct, Fourier, Auto };

/// Builds one operator per pair. Transmission pairs and pairs whose source is
/// off the horizontal axis always get the direct realization. With
/// common_padding the Fourier operators are padded to the same size so they
/// form a single group.
OperatorSet build_operator_set(const ImageGrid& grid, const std::vector<SourceDetectorPair>& pairs,
                               OperatorChoice choice, std::size_t extra_rows = 0,
                               bool common_padding = true);

/// Z0 = max over pairs and y of Σ_x h_i(y|x). Throws DegenerateOperator when
/// the maximum is not positive.
double row_sum_max(const OperatorSet& ops);

}  // namespace brt
