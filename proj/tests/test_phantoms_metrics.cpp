#include <doctest.h>

#include <cmath>
#include <random>

#include "brt/errors.hpp"
#include "brt/metrics.hpp"
#include "brt/phantoms.hpp"
#include "support.hpp"

using namespace brt;

namespace {

bool inside(const Shape& s, double x, double y, double slack = 0.0) {
  const double c = std::cos(s.rotation), n = std::sin(s.rotation);
  const double lx = c * (x - s.cx) + n * (y - s.cy), ly = -n * (x - s.cx) + c * (y - s.cy);
  return (lx / s.a) * (lx / s.a) + (ly / s.b) * (ly / s.b) <= 1.0 + slack;
}

// Mean SSIM written out window by window with its own Gaussian weights.
double ssim_oracle(const Image& a, const Image& b) {
  const ImageGrid& g = a.grid;
  double w[8][8], ws = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) ws += w[i][j] = std::exp(-((i - 3.5) * (i - 3.5) + (j - 3.5) * (j - 3.5)) / 4.5);
  double L = 0;
  for (std::size_t k = 0; k < g.size(); ++k) L = std::max({L, a.values[k], b.values[k]});
  const double C1 = 1e-4 * L * L, C2 = 9e-4 * L * L;
  double total = 0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + 8 <= g.L2; ++r)
    for (std::size_t c = 0; c + 8 <= g.L1; ++c) {
      double ma = 0, mb = 0;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          ma += w[i][j] / ws * a.at(r + i, c + j);
          mb += w[i][j] / ws * b.at(r + i, c + j);
        }
      double va = 0, vb = 0, cv = 0;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          const double da = a.at(r + i, c + j) - ma, db = b.at(r + i, c + j) - mb;
          va += w[i][j] / ws * da * da;
          vb += w[i][j] / ws * db * db;
          cv += w[i][j] / ws * da * db;
        }
      total += (2 * ma * mb + C1) * (2 * cv + C2) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
      ++count;
    }
  return total / static_cast<double>(count);
}

// Midpoint-rule line integral of a rendered description, for the analytic
// ray integrals.
double ray_by_sampling(const PhantomDescription& d, double px, double py, const Direction& u, double T) {
  const int n = 200000;
  const double h = T / n;
  double s = 0;
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) * h;
    double v = 0;
    for (const auto& sh : d.shapes) {
      const double x = px + t * u.ux, y = py + t * u.uy;
      const double c = std::cos(sh.rotation), sn = std::sin(sh.rotation);
      const double lx = c * (x - sh.cx) + sn * (y - sh.cy), ly = -sn * (x - sh.cx) + c * (y - sh.cy);
      if (sh.kind == ShapeKind::Ellipse && (lx / sh.a) * (lx / sh.a) + (ly / sh.b) * (ly / sh.b) <= 1) v += sh.density;
      if (sh.kind == ShapeKind::Rectangle && std::abs(lx) <= sh.a && std::abs(ly) <= sh.b) v += sh.density;
      if (sh.kind == ShapeKind::Gaussian) v += sh.density * std::exp(-(lx * lx + ly * ly) / (2 * sh.a * sh.a));
    }
    s += v * h;
  }
  return s;
}

}  // namespace

TEST_CASE("stretched ellipses keep point membership") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1, 1), pos(0.05, 0.9), ang(-kPi, kPi), sc(0.3, 2.0);
  for (int t = 0; t < 50; ++t) {
    const Shape s{ShapeKind::Ellipse, 0.3 * u(rng), 0.3 * u(rng), pos(rng), pos(rng), ang(rng), 1.0};
    const double sx = sc(rng), sy = sc(rng);
    const Shape m = stretch_ellipse(s, sx, sy);
    CHECK(m.a <= m.b * (1 + 1e-12));
    for (int k = 0; k < 400; ++k) {
      const double x = u(rng), y = u(rng);
      if (inside(s, x, y, 1e-9) != inside(s, x, y, -1e-9)) continue;
      CHECK(inside(s, x, y) == inside(m, sx * x, sy * y));
    }
    // Area scales with the determinant.
    CHECK(m.a * m.b == doctest::Approx(s.a * s.b * sx * sy).epsilon(1e-12));
  }
  const Shape axis{ShapeKind::Ellipse, 0.1, 0.2, 0.3, 0.5, 0.0, 1.0};
  const Shape m = stretch_ellipse(axis, 2.0, 1.0);
  CHECK(m.cx == doctest::Approx(0.2));
  CHECK(std::max(m.a, m.b) == doctest::Approx(0.6));
  CHECK(std::min(m.a, m.b) == doctest::Approx(0.5));
}

TEST_CASE("Shepp-Logan phantom") {
  const ImageGrid g(150, 200, 0.01, 0.01);
  const Image one = shepp_logan(g, 1.0);
  const Image three = shepp_logan(g, 3.0);
  double lo = 1e9, hi = -1e9;
  for (double v : one.values) lo = std::min(lo, v), hi = std::max(hi, v);
  CHECK(lo == 0.0);
  CHECK(hi == doctest::Approx(1.0));
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(three.values[k] == doctest::Approx(3.0 * one.values[k]));
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{0, 0}, {0, 149}, {199, 0}, {199, 149}})
    CHECK(one.at(r, c) == 0.0);
  // The head lies inside the 1.5 × 2 support.
  for (std::size_t r = 0; r < g.L2; ++r)
    for (std::size_t c = 0; c < g.L1; ++c)
      if (one.at(r, c) > 0) {
        CHECK(std::abs(g.x_center(c)) < 0.53);
        CHECK(std::abs(g.y_center(r)) < 0.93);
      }
  CHECK_THROWS_AS(shepp_logan(g, 0.0), NegativeInput);

  double peak = 0;
  const auto desc = shepp_logan_description(1.0);
  for (double d : {kPi / 10, -kPi / 10})
    for (double v : analytic_brt(desc, make_pair(kPi, d), g).values) peak = std::max(peak, v);
  CHECK(peak >= 0.4);
  CHECK(peak <= 0.6);
}

TEST_CASE("analytic ray integrals against sampling") {
  PhantomDescription d;
  d.shapes.push_back({ShapeKind::Ellipse, 0.1, -0.05, 0.3, 0.15, 0.7, 1.0});
  d.shapes.push_back({ShapeKind::Rectangle, -0.2, 0.1, 0.1, 0.25, -0.3, 0.5});
  d.shapes.push_back({ShapeKind::Gaussian, 0.0, 0.2, 0.08, 0.0, 0.0, 2.0});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.4, 0.4), ang(-kPi, kPi);
  for (int t = 0; t < 20; ++t) {
    const double px = u(rng), py = u(rng);
    const Direction dir = Direction::from_angle(ang(rng));
    double got = 0;
    for (const auto& s : d.shapes) got += shape_ray_integral(s, px, py, dir, 1.0);
    CHECK(got == doctest::Approx(ray_by_sampling(d, px, py, dir, 1.0)).epsilon(1e-4));
  }
  const Shape bad{ShapeKind::Ellipse, 0, 0, -1, 1, 0, 1};
  PhantomDescription b;
  b.shapes.push_back(bad);
  CHECK_THROWS_AS(render(b, ImageGrid(4, 4, 1, 1)), UnsupportedShape);
  b.shapes[0].a = NAN;
  CHECK_THROWS_AS(validate(b), UnsupportedShape);
}

TEST_CASE("box exit distance") {
  const ImageGrid g(10, 20, 0.1, 0.1);
  CHECK(box_exit_distance(g, 0.0, 0.0, Direction{1, 0}) == doctest::Approx(0.5));
  CHECK(box_exit_distance(g, 0.0, 0.0, Direction{0, -1}) == doctest::Approx(1.0));
  CHECK(box_exit_distance(g, 0.2, 0.3, Direction::from_angle(kPi / 4)) ==
        doctest::Approx(testing::ray_box_length(0.2, 0.3, std::cos(kPi / 4), std::sin(kPi / 4), -0.5, 0.5, -1, 1)));
}

TEST_CASE("rectangle phantom") {
  const ImageGrid g(150, 200, 0.01, 0.01);
  const Image r = rectangle_phantom(g, 1.0, 1.5, 1.0, 3.0);
  CHECK(r.at(100, 75) == 3.0);
  CHECK(r.at(5, 5) == 0.0);
  double hi = 0, sum = 0;
  for (double v : r.values) hi = std::max(hi, v), sum += v;
  CHECK(hi == 3.0);
  CHECK(sum == doctest::Approx(3.0 * 100 * 150));
  CHECK_THROWS_AS(rectangle_phantom(g, 2.0, 1.0), OutOfBounds);
  CHECK_THROWS_AS(rectangle_phantom(g, 1.0, -1.0), OutOfBounds);
}

TEST_CASE("scatter maps") {
  const ImageGrid g(3, 2, 1.0, 1.0);
  const Image mu(g, ImageKind::Attenuation, {0.0, 1.0, 0.5, 0.0, 0.25, 1.0});
  const Image p = scatter_map(mu, ScatterVariant::Positive), z = scatter_map(mu, ScatterVariant::Nonneg);
  CHECK(p.values[0] == doctest::Approx(0.31623).epsilon(1e-5));
  CHECK(p.values[1] == doctest::Approx(0.54772).epsilon(1e-5));
  CHECK(z.values[0] == 0.0);
  CHECK(z.values[1] == doctest::Approx(0.38730).epsilon(1e-5));
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK((z.values[k] > 0) == (mu.values[k] > 0));
    CHECK(p.values[k] <= 1.0);
    CHECK(p.kind == ImageKind::Scatter);
  }
  Image neg = mu;
  neg.values[2] = -0.1;
  CHECK_THROWS_AS(scatter_map(neg, ScatterVariant::Positive), NegativeInput);
}

TEST_CASE("SSIM") {
  const ImageGrid g(30, 24, 1.0, 1.0);
  std::mt19937_64 rng(10);
  const Image a(g, ImageKind::Scatter, testing::uniform(g.size(), rng));
  Image b = a;
  for (double& v : b.values) v = 0.7 * v + 0.2 * std::uniform_real_distribution<double>(0, 1)(rng);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-14));
  CHECK(ssim(a, b) == doctest::Approx(ssim_oracle(a, b)).epsilon(1e-10));
  CHECK(ssim(a, b) < 1.0);

  const Image sl = shepp_logan(ImageGrid(60, 80, 0.025, 0.025), 1.0);
  Image shifted = sl;
  for (double& v : shifted.values) v += 0.3;
  CHECK(ssim(sl, shifted) < 1.0);
  CHECK(ssim(sl, shifted) == doctest::Approx(ssim_oracle(sl, shifted)).epsilon(1e-10));
  // Negation flips structure; with zero local means (a checkerboard under
  // the symmetric window) the luminance factor stays 1.
  Image check(g, ImageKind::Attenuation);
  for (std::size_t r = 0; r < g.L2; ++r)
    for (std::size_t c = 0; c < g.L1; ++c) check.at(r, c) = (r + c) % 2 ? 0.5 : -0.5;
  Image neg = check;
  for (double& v : neg.values) v = -v;
  CHECK(ssim(check, neg) < 0.0);
  CHECK_THROWS_AS(ssim(a, sl), GridMismatch);
}

TEST_CASE("baseline preprocessing") {
  const ImageGrid g(4, 4, 0.1, 0.1);
  auto ms = make_measurement_set(g, {make_pair(kPi, 0.3)}, 350.0, 0.0);
  const auto pre = baseline_preprocess(ms);
  for (std::size_t y = 0; y < g.size(); ++y) {
    CHECK(pre.dbar[0][y] == 1.0);
    CHECK(pre.bhat[0][y] == doctest::Approx(std::log(350.0)));
  }
  ms = make_measurement_set(g, {make_pair(kPi, 0.3)}, 350.0, 17.5);
  std::mt19937_64 rng(3);
  const auto b = testing::uniform(g.size(), rng, 0.0, 2.0);
  for (std::size_t y = 0; y < g.size(); ++y) ms.counts[0][y] = 350.0 * std::exp(-b[y]) + 17.5;
  const auto p2 = baseline_preprocess(ms);
  for (std::size_t y = 0; y < g.size(); ++y) CHECK(p2.bhat[0][y] == doctest::Approx(b[y]).epsilon(1e-13));
  ms.counts[0][0] = -1;
  CHECK_THROWS_AS(baseline_preprocess(ms), NegativeInput);
}

TEST_CASE("baseline scatter estimate") {
  const ImageGrid g(30, 40, 0.05, 0.05);
  const std::vector<SourceDetectorPair> pairs = {make_pair(kPi, kPi / 10), make_pair(kPi, -kPi / 10),
                                                 make_pair(kPi, 0.0)};
  auto ms = make_measurement_set(g, pairs, 5000.0, 0.0);
  const OperatorSet ops = build_operator_set(g, pairs, OperatorChoice::Auto);
  const Image mu = shepp_logan(g, 1.0);
  const Image alpha = scatter_map(mu, ScatterVariant::Positive);
  ms.counts = mean_counts(alpha, mu, ms, ops).g;

  const auto pre = baseline_preprocess(ms);
  const Image est = baseline_scatter(pre, ms, &mu, &ops);
  CHECK(testing::max_abs_diff(est.values, alpha.values) <= 1e-12);

  // Zero attenuation averages d̄/I0 over the scatter pairs.
  const Image flat = baseline_scatter(pre, ms, nullptr, nullptr);
  for (std::size_t y = 0; y < g.size(); ++y)
    CHECK(flat.values[y] == doctest::Approx(std::clamp((pre.dbar[0][y] + pre.dbar[1][y]) / 2 / 5000.0, 0.0, 1.0)));
  CHECK_THROWS_AS(baseline_scatter(pre, ms, &mu, nullptr), GridMismatch);
}
