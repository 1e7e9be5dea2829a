#include "brt/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brt/errors.hpp"

namespace brt {
namespace {

// (density, a, b, x0, y0, rotation in degrees)
constexpr double kModifiedSheppLogan[10][6] = {
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
};

// Point and direction in the shape's own frame.
void to_local(const Shape& s, double px, double py, double& lx, double& ly) {
  const double c = std::cos(s.rotation), sn = std::sin(s.rotation);
  const double dx = px - s.cx, dy = py - s.cy;
  lx = c * dx + sn * dy;
  ly = -sn * dx + c * dy;
}

double shape_value(const Shape& s, double px, double py) {
  double lx, ly;
  to_local(s, px, py, lx, ly);
  switch (s.kind) {
    case ShapeKind::Ellipse:
      return (lx / s.a) * (lx / s.a) + (ly / s.b) * (ly / s.b) <= 1.0 ? s.density : 0.0;
    case ShapeKind::Rectangle:
      return std::abs(lx) <= s.a && std::abs(ly) <= s.b ? s.density : 0.0;
    case ShapeKind::Gaussian:
      return s.density * std::exp(-(lx * lx + ly * ly) / (2.0 * s.a * s.a));
  }
  return 0.0;
}

}  // namespace

void validate(const PhantomDescription& desc) {
  if (!std::isfinite(desc.scale)) throw UnsupportedShape("phantom scale is not finite");
  for (const auto& s : desc.shapes) {
    const bool finite = std::isfinite(s.cx) && std::isfinite(s.cy) && std::isfinite(s.a) &&
                        std::isfinite(s.b) && std::isfinite(s.rotation) && std::isfinite(s.density);
    if (!finite) throw UnsupportedShape("shape has non-finite parameters");
    if (!(s.a > 0.0)) throw UnsupportedShape("shape size must be positive");
    if (s.kind != ShapeKind::Gaussian && !(s.b > 0.0))
      throw UnsupportedShape("shape size must be positive");
  }
}

Image render(const PhantomDescription& desc, const ImageGrid& grid) {
  validate(desc);
  Image img(grid, ImageKind::Attenuation);
  for (std::size_t r = 0; r < grid.L2; ++r) {
    const double y = grid.y_center(r);
    for (std::size_t c = 0; c < grid.L1; ++c) {
      const double x = grid.x_center(c);
      double v = 0.0;
      for (const auto& s : desc.shapes) v += shape_value(s, x, y);
      img.at(r, c) = std::max(0.0, v * desc.scale);
    }
  }
  return img;
}

Shape stretch_ellipse(const Shape& s, double sx, double sy) {
  const double c = std::cos(s.rotation), n = std::sin(s.rotation);
  const double ia = 1.0 / (s.a * s.a), ib = 1.0 / (s.b * s.b);
  // Quadratic form of the ellipse after x → sx·x, y → sy·y.
  const double q11 = (c * c * ia + n * n * ib) / (sx * sx);
  const double q22 = (n * n * ia + c * c * ib) / (sy * sy);
  const double q12 = c * n * (ia - ib) / (sx * sy);
  const double mid = 0.5 * (q11 + q22), rad = std::hypot(0.5 * (q11 - q22), q12);
  Shape t = s;
  t.cx = s.cx * sx;
  t.cy = s.cy * sy;
  t.rotation = 0.5 * std::atan2(2.0 * q12, q11 - q22);  // axis of the larger eigenvalue
  t.a = 1.0 / std::sqrt(mid + rad);
  t.b = 1.0 / std::sqrt(mid - rad);
  return t;
}

PhantomDescription shepp_logan_description(double max_mu) {
  PhantomDescription d;
  d.scale = max_mu;
  // The table lives on [-1, 1]²; that square is mapped onto 1.5 × 2.
  for (const auto& e : kModifiedSheppLogan)
    d.shapes.push_back(stretch_ellipse(
        {ShapeKind::Ellipse, e[3], e[4], e[1], e[2], e[5] * kPi / 180.0, e[0]}, 0.75, 1.0));
  return d;
}

Image shepp_logan(const ImageGrid& grid, double max_mu) {
  if (!(max_mu > 0.0)) throw NegativeInput("max_mu must be positive");
  Image img = render(shepp_logan_description(1.0), grid);
  for (double& v : img.values) v = std::min(v, 1.0) * max_mu;
  return img;
}

Image rectangle_phantom(const ImageGrid& grid, double width, double height, double value,
                        double scale) {
  if (!(width > 0.0) || !(height > 0.0)) throw OutOfBounds("rectangle size must be positive");
  if (width > grid.width() || height > grid.height())
    throw OutOfBounds("rectangle does not fit in the grid extent");
  PhantomDescription d;
  d.scale = scale;
  d.shapes.push_back({ShapeKind::Rectangle, 0.0, 0.0, width / 2, height / 2, 0.0, value});
  return render(d, grid);
}

Image scatter_map(const Image& mu_unscaled, ScatterVariant variant) {
  Image out(mu_unscaled.grid, ImageKind::Scatter);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double m = mu_unscaled.values[i];
    if (!(m >= 0.0)) throw NegativeInput("scatter map input must be nonnegative");
    const double a = variant == ScatterVariant::Positive ? std::sqrt(0.1 + 0.2 * m)
                                                         : std::sqrt(0.15 * m);
    out.values[i] = std::min(a, 1.0);
  }
  return out;
}

double box_exit_distance(const ImageGrid& grid, double px, double py, const Direction& d) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double hx = grid.width() / 2, hy = grid.height() / 2;
  const double tx = d.ux > 0 ? (hx - px) / d.ux : (d.ux < 0 ? (-hx - px) / d.ux : inf);
  const double ty = d.uy > 0 ? (hy - py) / d.uy : (d.uy < 0 ? (-hy - py) / d.uy : inf);
  return std::max(0.0, std::min(tx, ty));
}

double shape_ray_integral(const Shape& s, double px, double py, const Direction& d, double T) {
  double lx, ly;
  to_local(s, px, py, lx, ly);
  const double c = std::cos(s.rotation), sn = std::sin(s.rotation);
  const double dx = c * d.ux + sn * d.uy, dy = -sn * d.ux + c * d.uy;

  switch (s.kind) {
    case ShapeKind::Ellipse: {
      const double ex = lx / s.a, ey = ly / s.b, fx = dx / s.a, fy = dy / s.b;
      const double A = fx * fx + fy * fy, B = 2.0 * (ex * fx + ey * fy), C = ex * ex + ey * ey - 1.0;
      const double disc = B * B - 4.0 * A * C;
      if (disc <= 0.0) return 0.0;
      const double sq = std::sqrt(disc);
      // Stable pair of roots.
      const double q = -0.5 * (B + (B >= 0 ? sq : -sq));
      double t1 = q / A, t2 = C / q;
      if (q == 0.0) t1 = t2 = 0.0;
      if (t1 > t2) std::swap(t1, t2);
      const double len = std::min(T, t2) - std::max(0.0, t1);
      return len > 0.0 ? len * s.density : 0.0;
    }
    case ShapeKind::Rectangle: {
      double lo = 0.0, hi = T;
      auto slab = [&](double p, double v, double h) {
        if (v == 0.0) {
          if (std::abs(p) > h) hi = -1.0;
          return;
        }
        double ta = (-h - p) / v, tb = (h - p) / v;
        if (ta > tb) std::swap(ta, tb);
        lo = std::max(lo, ta);
        hi = std::min(hi, tb);
      };
      slab(lx, dx, s.a);
      slab(ly, dy, s.b);
      return hi > lo ? (hi - lo) * s.density : 0.0;
    }
    case ShapeKind::Gaussian: {
      const double s0 = lx * dx + ly * dy;  // projection of the offset on the ray
      const double perp2 = std::max(0.0, lx * lx + ly * ly - s0 * s0);
      const double k = s.a * std::sqrt(2.0);
      return s.density * std::exp(-perp2 / (2.0 * s.a * s.a)) * s.a * std::sqrt(kPi / 2.0) *
             (std::erf((s0 + T) / k) - std::erf(s0 / k));
    }
  }
  return 0.0;
}

SinogramData analytic_brt(const PhantomDescription& desc, const SourceDetectorPair& pair,
                          const ImageGrid& grid) {
  validate(desc);
  SinogramData out{0, grid, std::vector<double>(grid.size(), 0.0)};
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < grid.L2; ++r) {
    const double y = grid.y_center(r);
    for (std::size_t c = 0; c < grid.L1; ++c) {
      const double x = grid.x_center(c);
      const double Ts = box_exit_distance(grid, x, y, pair.theta_s);
      const double Td = box_exit_distance(grid, x, y, pair.theta_d);
      double v = 0.0;
      for (const auto& s : desc.shapes)
        v += shape_ray_integral(s, x, y, pair.theta_s, Ts) +
             shape_ray_integral(s, x, y, pair.theta_d, Td);
      out.values[grid.index(r, c)] = v * desc.scale;
    }
  }
  return out;
}

}  // namespace brt
