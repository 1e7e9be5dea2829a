#include <doctest.h>

#include <cmath>
#include <random>

#include "brt/errors.hpp"
#include "brt/forward_model.hpp"
#include "brt/kernels.hpp"
#include "brt/surrogates.hpp"
#include "support.hpp"

using namespace brt;

namespace {

double idiv_term(double d, double g) { return d > 0 ? d * std::log(d / g) - d + g : g; }

}  // namespace

TEST_CASE("active sets") {
  const ImageGrid g(5, 4, 1.0, 1.0);
  auto count = [](const std::vector<std::uint8_t>& m) {
    std::size_t n = 0;
    for (auto v : m) n += v;
    return n;
  };
  CHECK(count(active_set(g, make_pair(kPi, kPi / 10))) == 20);
  CHECK(count(active_set(g, make_pair(0.4, 0.4 + kPi))) == 20);

  // Source at π, detector toward +x: the detector-edge column is the last one.
  const auto h = active_set(g, make_pair(kPi, 0.0));
  CHECK(count(h) == 4);
  for (std::size_t r = 0; r < 4; ++r) CHECK(h[g.index(r, 4)] == 1);
  const auto v = active_set(g, make_pair(-kPi / 2, kPi / 2));
  CHECK(count(v) == 5);
  for (std::size_t c = 0; c < 5; ++c) CHECK(v[g.index(3, c)] == 1);

  const auto ms = make_measurement_set(g, {make_pair(kPi, 0.0), make_pair(kPi, 0.3)}, 100.0, 2.0);
  for (std::size_t y = 0; y < g.size(); ++y) {
    CHECK(ms.source.beta[0][y] == (h[y] ? 2.0 : 0.0));
    CHECK(ms.source.beta[1][y] == 2.0);
    CHECK(ms.source.I0[y] == 100.0);
  }
  CHECK_NOTHROW(ms.validate());
}

TEST_CASE("measurement set validation") {
  const ImageGrid g(4, 4, 1.0, 1.0);
  const auto base = make_measurement_set(g, {make_pair(kPi, 0.0), make_pair(kPi, 0.3)}, 10.0, 1.0);
  auto ms = base;
  ms.counts[1][3] = -1.0;
  CHECK_THROWS_AS(ms.validate(), NegativeInput);
  ms = base;
  ms.counts[0][0] = 2.0;  // off the transmission active set
  CHECK_THROWS_AS(ms.validate(), NegativeInput);
  ms = base;
  ms.source.I0[2] = 0.0;
  CHECK_THROWS_AS(ms.validate(), NegativeInput);
  ms = base;
  ms.source.beta[1][2] = NAN;
  CHECK_THROWS_AS(ms.validate(), NegativeInput);
  ms = base;
  ms.counts[1].pop_back();
  CHECK_THROWS_AS(ms.validate(), GridMismatch);
  ms = base;
  ms.active.pop_back();
  CHECK_THROWS_AS(ms.validate(), GridMismatch);
}

TEST_CASE("mean counts against dense weights") {
  const ImageGrid g(9, 7, 0.1, 0.12);
  std::mt19937_64 rng(12);
  const std::vector<SourceDetectorPair> pairs = {make_pair(kPi, kPi / 10), make_pair(kPi, 0.0),
                                                 make_pair(kPi / 2, -kPi / 4)};
  auto ms = make_measurement_set(g, pairs, 300.0, 5.0);
  for (auto& v : ms.source.I0) v = 200.0 + 100.0 * std::uniform_real_distribution<double>(0, 1)(rng);
  const Image alpha(g, ImageKind::Scatter, testing::uniform(g.size(), rng));
  const Image mu(g, ImageKind::Attenuation, testing::uniform(g.size(), rng, 0, 3));
  const OperatorSet ops = build_operator_set(g, pairs, OperatorChoice::Direct);
  const MeanCounts mc = mean_counts(alpha, mu, ms, ops);

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto W = testing::brute_force_weights(g, pairs[i]);
    for (std::size_t y = 0; y < g.size(); ++y) {
      double proj = 0;
      for (std::size_t x = 0; x < g.size(); ++x) proj += W[y][x] * mu.values[x];
      double want = 0.0;
      if (ms.active[i][y]) {
        const double s = ms.source.I0[y] * std::exp(-proj);
        want = 5.0 + (pairs[i].is_transmission ? s : alpha.values[y] * s);
      }
      CHECK(std::abs(mc.g[i][y] - want) <= 1e-12 * (1 + want));
    }
  }

  const Image bad_alpha(g, ImageKind::Scatter, std::vector<double>(g.size(), 1.5));
  CHECK_THROWS_AS(mean_counts(bad_alpha, mu, ms, ops), NegativeImage);
  const Image other(ImageGrid(3, 3, 1, 1), ImageKind::Attenuation);
  CHECK_THROWS_AS(mean_counts(alpha, other, ms, ops), GridMismatch);
}

TEST_CASE("zero attenuation gives β + α·I0") {
  const ImageGrid g(6, 6, 1.0, 1.0);
  std::mt19937_64 rng(1);
  const auto ms = make_measurement_set(g, {make_pair(kPi, 0.4)}, 50.0, 3.0);
  const Image alpha(g, ImageKind::Scatter, testing::uniform(g.size(), rng));
  const Image mu(g, ImageKind::Attenuation);
  const auto mc = mean_counts(alpha, mu, ms, build_operator_set(g, ms.pairs, OperatorChoice::Auto));
  for (std::size_t y = 0; y < g.size(); ++y) CHECK(mc.g[0][y] == doctest::Approx(3.0 + 50.0 * alpha.values[y]));
}

TEST_CASE("Poisson simulation") {
  MeanCounts mc;
  const std::size_t n = 40000;
  mc.g = {std::vector<double>(n, 6.0), std::vector<double>(n, 0.0)};
  const auto d = simulate(mc, 77);
  double m = 0, v = 0;
  for (double x : d[0]) {
    CHECK(x == std::floor(x));
    m += x;
  }
  m /= n;
  for (double x : d[0]) v += (x - m) * (x - m);
  v /= n - 1;
  CHECK(std::abs(m - 6.0) < 5 * std::sqrt(6.0 / n));
  CHECK(std::abs(v - 6.0) < 0.3);
  for (double x : d[1]) CHECK(x == 0.0);

  CHECK(simulate(mc, 77) == d);
  CHECK_FALSE(simulate(mc, 78)[0] == d[0]);
  const int before = workers();
  set_workers(1);
  const auto one = simulate(mc, 77);
  set_workers(3);
  const auto three = simulate(mc, 77);
  set_workers(before);
  CHECK(one == d);
  CHECK(three == d);
}

TEST_CASE("I-divergence") {
  std::mt19937_64 rng(5);
  const std::size_t n = 300;
  PairArrays d(2), g(2);
  std::vector<std::vector<std::uint8_t>> act(2, std::vector<std::uint8_t>(n, 1));
  std::poisson_distribution<int> pd(4.0);
  for (int i = 0; i < 2; ++i) {
    g[i] = testing::uniform(n, rng, 0.5, 9.0);
    for (std::size_t y = 0; y < n; ++y) d[i].push_back(pd(rng));
  }
  act[1][7] = 0;
  double want = 0;
  for (int i = 0; i < 2; ++i)
    for (std::size_t y = 0; y < n; ++y)
      if (act[i][y]) want += idiv_term(d[i][y], g[i][y]);
  const double got = i_divergence(d, g, act);
  CHECK(got == doctest::Approx(want).epsilon(1e-13));
  CHECK(got >= 0.0);

  // I(d‖g) = −L(g) + Σ (d ln d − d).
  double c = 0;
  for (int i = 0; i < 2; ++i)
    for (std::size_t y = 0; y < n; ++y)
      if (act[i][y] && d[i][y] > 0) c += d[i][y] * std::log(d[i][y]) - d[i][y];
  CHECK(got == doctest::Approx(-log_likelihood(d, g, act) + c).epsilon(1e-12));

  PairArrays same = g;
  CHECK(i_divergence(same, g, act) == doctest::Approx(0.0).scale(1.0));
  // Zero counts contribute the mean.
  PairArrays z = {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  double sum_g = 0;
  for (int i = 0; i < 2; ++i)
    for (std::size_t y = 0; y < n; ++y)
      if (act[i][y]) sum_g += g[i][y];
  CHECK(i_divergence(z, g, act) == doctest::Approx(sum_g).epsilon(1e-13));

  g[0][3] = 0.0;
  d[0][3] = 1.0;
  CHECK_THROWS_AS(i_divergence(d, g, act), ModelZeroWithData);
  d[0][3] = 0.0;
  CHECK_NOTHROW(i_divergence(d, g, act));
  g[1].pop_back();
  CHECK_THROWS_AS(i_divergence(d, g, act), GridMismatch);
}

TEST_CASE("objective is fidelity plus weighted penalties") {
  const ImageGrid g(10, 8, 0.1, 0.1);
  std::mt19937_64 rng(9);
  auto ms = make_measurement_set(g, {make_pair(kPi, kPi / 10), make_pair(kPi, -kPi / 10)}, 100.0, 4.0);
  for (auto& c : ms.counts)
    for (double& v : c) v = std::poisson_distribution<int>(40)(rng);
  const Image alpha(g, ImageKind::Scatter, testing::uniform(g.size(), rng));
  const Image mu(g, ImageKind::Attenuation, testing::uniform(g.size(), rng, 0, 2));
  const OperatorSet ops = build_operator_set(g, ms.pairs, OperatorChoice::Direct);
  const RegularizerSettings reg;
  const auto o = objective(ms, alpha, mu, ops, 0.3, 0.7, reg);
  const auto mc = mean_counts(alpha, mu, ms, ops);
  CHECK(o.i_div == doctest::Approx(i_divergence(ms.counts, mc.g, ms.active)).epsilon(1e-14));
  CHECK(o.r_alpha == doctest::Approx(regularizer(alpha, reg)).epsilon(1e-14));
  CHECK(o.r_mu == doctest::Approx(regularizer(mu, reg)).epsilon(1e-14));
  CHECK(o.J == doctest::Approx(o.i_div + 0.3 * o.r_alpha + 0.7 * o.r_mu).epsilon(1e-14));
}
