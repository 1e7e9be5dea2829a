#include "brt/geometry.hpp"

#include <cmath>
#include <string>

#include "brt/errors.hpp"

namespace brt {

Direction Direction::from_angle(double radians) {
  double c = std::cos(radians);
  double s = std::sin(radians);
  // cos/sin of multiples of π/2 leave ~1e-16 residues; snap them so axis
  // directions are exact.
  if (std::abs(c) < 1e-15) { c = 0.0; s = s > 0 ? 1.0 : -1.0; }
  if (std::abs(s) < 1e-15) { s = 0.0; c = c > 0 ? 1.0 : -1.0; }
  return {c, s};
}

double Direction::cross_norm(const Direction& o) const {
  return std::abs(ux * o.uy - uy * o.ux);
}

bool SourceDetectorPair::source_horizontal() const {
  return std::abs(theta_s.uy) <= kAlignTol && std::abs(std::abs(theta_s.ux) - 1.0) <= kAlignTol;
}

SourceDetectorPair make_pair(double source_angle, double detector_angle) {
  SourceDetectorPair p;
  p.theta_s = Direction::from_angle(source_angle);
  p.theta_d = Direction::from_angle(detector_angle);
  p.is_transmission = std::abs(p.theta_s.ux + p.theta_d.ux) <= kDirectionTol &&
                      std::abs(p.theta_s.uy + p.theta_d.uy) <= kDirectionTol;
  if (p.is_transmission) p.theta_d = -p.theta_s;
  return p;
}

ImageGrid::ImageGrid(std::size_t l1, std::size_t l2, double d1, double d2)
    : L1(l1), L2(l2), delta1(d1), delta2(d2) {
  if (l1 < 2 || l2 < 2) throw InvalidGrid("image grid needs at least 2x2 samples");
  if (!(d1 > 0.0) || !(d2 > 0.0) || !std::isfinite(d1) || !std::isfinite(d2))
    throw InvalidGrid("sample spacings must be positive and finite");
}

double ImageGrid::x_center(std::size_t col) const {
  return (static_cast<double>(col) + 0.5) * delta1 - 0.5 * width();
}

double ImageGrid::y_center(std::size_t row) const {
  return (static_cast<double>(row) + 0.5) * delta2 - 0.5 * height();
}

Image::Image(const ImageGrid& g, ImageKind k, std::vector<double> v)
    : grid(g), kind(k), values(std::move(v)) {
  if (values.size() != grid.size())
    throw GridMismatch("image payload has " + std::to_string(values.size()) +
                       " samples, grid expects " + std::to_string(grid.size()));
}

void Image::check_constraints() const {
  for (double v : values) {
    if (!std::isfinite(v)) throw NegativeImage("image contains non-finite values");
    if (kind == ImageKind::Attenuation && v < 0.0)
      throw NegativeImage("attenuation image has negative values");
    if (kind == ImageKind::Scatter && (v < 0.0 || v > 1.0))
      throw NegativeImage("scatter image leaves [0, 1]");
  }
}

std::pair<double, double> spreading_factors(const SourceDetectorPair& pair,
                                            const ImageGrid& grid) {
  if (!pair.source_horizontal())
    throw AlignmentError("Fourier operator needs the source direction on the horizontal axis");
  const double c = std::abs(pair.theta_s.dot(pair.theta_d));
  if (c <= kAlignTol)
    throw DegenerateAngleError("source and detector directions are perpendicular");
  const double a_s = grid.width();
  return {a_s, a_s / c};
}

std::pair<std::size_t, std::size_t> padded_dims(const SourceDetectorPair& pair,
                                                const ImageGrid& grid) {
  const auto [a_s, a_d] = spreading_factors(pair, grid);
  (void)a_s;
  const double extra = std::ceil(a_d * pair.theta_s.cross_norm(pair.theta_d) / grid.delta2);
  return {3 * grid.L1, grid.L2 + static_cast<std::size_t>(extra)};
}

}  // namespace brt
