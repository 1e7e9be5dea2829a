#pragma once

#include <vector>

#include "brt/geometry.hpp"
#include "brt/operators.hpp"

namespace brt {

enum class ShapeKind { Ellipse, Rectangle, Gaussian };

/// One additive term of a phantom.
///
/// Ellipse: semi-axes (a, b). Rectangle: half-widths (a, b). Gaussian:
/// isotropic with standard deviation a (b is ignored). `rotation` is in
/// radians, counterclockwise; `density` is the value added inside the shape
/// (the peak value for a Gaussian).
struct Shape {
  ShapeKind kind = ShapeKind::Ellipse;
  double cx = 0.0, cy = 0.0;
  double a = 1.0, b = 1.0;
  double rotation = 0.0;
  double density = 1.0;
};

struct PhantomDescription {
  std::vector<Shape> shapes;
  double scale = 1.0;
};

/// Throws UnsupportedShape for non-positive or non-finite shape parameters.
void validate(const PhantomDescription& desc);

/// Samples the phantom at pixel centers and clips the result at zero.
Image render(const PhantomDescription& desc, const ImageGrid& grid);

/// Image of an ellipse under (x, y) → (sx·x, sy·y).
Shape stretch_ellipse(const Shape& s, double sx, double sy);

/// Modified Shepp-Logan ellipse set (values in [0, 1] before scaling), with
/// its [-1, 1]² frame stretched onto a 1.5 × 2 rectangle; the head spans
/// about 1.04 × 1.84.
PhantomDescription shepp_logan_description(double max_mu = 1.0);
Image shepp_logan(const ImageGrid& grid, double max_mu);

/// Centered rectangle of the given width and height filled with value·scale.
/// Throws OutOfBounds if it does not fit in the grid.
Image rectangle_phantom(const ImageGrid& grid, double width = 1.0, double height = 1.5,
                        double value = 1.0, double scale = 1.0);

enum class ScatterVariant { Positive, Nonneg };

/// Scatter density tied to an unscaled attenuation image in [0, 1]:
/// positive α = √(0.1 + 0.2μ), nonneg α = √(0.15μ).
Image scatter_map(const Image& mu_unscaled, ScatterVariant variant);

/// Exact broken-ray transform of the phantom at every pixel center, with
/// both rays clipped to the grid's bounding box.
SinogramData analytic_brt(const PhantomDescription& desc, const SourceDetectorPair& pair,
                          const ImageGrid& grid);

/// Integral of one shape (unit scale) along {p + tθ, 0 ≤ t ≤ T}.
double shape_ray_integral(const Shape& s, double px, double py, const Direction& d, double T);

/// Distance from an interior point to the grid's bounding box along d.
double box_exit_distance(const ImageGrid& grid, double px, double py, const Direction& d);

}  // namespace brt
