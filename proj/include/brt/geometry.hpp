#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace brt {

inline constexpr double kPi = 3.14159265358979323846;

/// Tolerance for unit-norm and antipodal checks.
inline constexpr double kDirectionTol = 1e-12;
/// Tolerance for axis alignment and for the |θs·θd| > 0 requirement.
inline constexpr double kAlignTol = 1e-9;

/// Unit vector in the image plane. Angles are counterclockwise from +x.
struct Direction {
  double ux = 1.0;
  double uy = 0.0;

  static Direction from_angle(double radians);
  double dot(const Direction& o) const { return ux * o.ux + uy * o.uy; }
  /// Magnitude of the 2D cross product.
  double cross_norm(const Direction& o) const;
  Direction operator-() const { return {-ux, -uy}; }
  bool operator==(const Direction&) const = default;
};

/// One broken-ray family: directions from the scatter location toward the
/// source and toward the detector.
struct SourceDetectorPair {
  Direction theta_s;
  Direction theta_d;
  bool is_transmission = false;

  /// θs is parallel to the horizontal sampling axis.
  bool source_horizontal() const;
  bool operator==(const SourceDetectorPair&) const = default;
};

SourceDetectorPair make_pair(double source_angle, double detector_angle);

/// Uniform orthogonal lattice with L2 rows (vertical) and L1 columns.
///
/// Pixel (r, c) has its center at
///   x = (c + 1/2)·Δ1 − L1·Δ1/2,   y = (r + 1/2)·Δ2 − L2·Δ2/2,
/// so the lattice is centered on the origin and row index grows with y.
struct ImageGrid {
  std::size_t L1 = 2;
  std::size_t L2 = 2;
  double delta1 = 1.0;
  double delta2 = 1.0;

  ImageGrid() = default;
  ImageGrid(std::size_t l1, std::size_t l2, double d1, double d2);

  std::size_t size() const { return L1 * L2; }
  std::size_t index(std::size_t row, std::size_t col) const { return row * L1 + col; }
  double width() const { return static_cast<double>(L1) * delta1; }
  double height() const { return static_cast<double>(L2) * delta2; }
  double x_center(std::size_t col) const;
  double y_center(std::size_t row) const;
  bool operator==(const ImageGrid&) const = default;
};

enum class ImageKind : std::uint8_t { Attenuation = 0, Scatter = 1, Data = 2 };

struct Image {
  ImageGrid grid;
  ImageKind kind = ImageKind::Attenuation;
  std::vector<double> values;

  Image() = default;
  Image(const ImageGrid& g, ImageKind k, double fill = 0.0)
      : grid(g), kind(k), values(g.size(), fill) {}
  Image(const ImageGrid& g, ImageKind k, std::vector<double> v);

  double& at(std::size_t row, std::size_t col) { return values[grid.index(row, col)]; }
  double at(std::size_t row, std::size_t col) const { return values[grid.index(row, col)]; }
  std::span<const double> view() const { return values; }

  /// Throws NegativeImage if the values leave the set implied by `kind`.
  void check_constraints() const;
};

/// Filter lengths (a_s, a_d) of the Fourier-domain operator.
std::pair<double, double> spreading_factors(const SourceDetectorPair& pair, const ImageGrid& grid);

/// Zero-padded DFT size (N1, N2) for the Fourier-domain operator.
std::pair<std::size_t, std::size_t> padded_dims(const SourceDetectorPair& pair,
                                                const ImageGrid& grid);

}  // namespace brt
