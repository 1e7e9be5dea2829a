#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "brt/geometry.hpp"

namespace testing {

inline std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// RMS of (a − ref) over RMS of ref, restricted to pixels at least `margin`
/// cells from every edge.
inline double interior_rel_rmse(const brt::ImageGrid& g, std::span<const double> a,
                                std::span<const double> ref, std::size_t margin) {
  double num = 0, den = 0;
  for (std::size_t r = margin; r + margin < g.L2; ++r)
    for (std::size_t c = margin; c + margin < g.L1; ++c) {
      const std::size_t k = g.index(r, c);
      num += (a[k] - ref[k]) * (a[k] - ref[k]);
      den += ref[k] * ref[k];
    }
  return std::sqrt(num / den);
}

/// Length of {p + tθ : t ≥ 0} inside the axis-aligned box [x0, x1] × [y0, y1]
/// (slab method).
inline double ray_box_length(double px, double py, double ux, double uy, double x0, double x1, double y0,
                             double y1) {
  double lo = 0.0, hi = INFINITY;
  auto slab = [&](double p, double u, double a, double b) {
    if (u == 0.0) {
      if (p < a || p > b) hi = -1.0;
      return;
    }
    double t0 = (a - p) / u, t1 = (b - p) / u;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  };
  slab(px, ux, x0, x1);
  slab(py, uy, y0, y1);
  return hi > lo ? hi - lo : 0.0;
}

/// Dense weight matrix of one pair by per-cell slab intersection:
/// W[y][x] = |ray_s(y) ∩ cell x| + |ray_d(y) ∩ cell x|.
inline std::vector<std::vector<double>> brute_force_weights(const brt::ImageGrid& g,
                                                            const brt::SourceDetectorPair& p) {
  const std::size_t n = g.size();
  std::vector<std::vector<double>> W(n, std::vector<double>(n, 0.0));
  const double X0 = -0.5 * g.width(), Y0 = -0.5 * g.height();
  for (std::size_t y = 0; y < n; ++y) {
    const double px = g.x_center(y % g.L1), py = g.y_center(y / g.L1);
    for (std::size_t x = 0; x < n; ++x) {
      const double cx0 = X0 + static_cast<double>(x % g.L1) * g.delta1;
      const double cy0 = Y0 + static_cast<double>(x / g.L1) * g.delta2;
      for (const auto& d : {p.theta_s, p.theta_d})
        W[y][x] += ray_box_length(px, py, d.ux, d.uy, cx0, cx0 + g.delta1, cy0, cy0 + g.delta2);
    }
  }
  return W;
}

}  // namespace testing
