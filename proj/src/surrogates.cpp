#include "brt/surrogates.hpp"

#include <cmath>

#include "brt/errors.hpp"
#include "brt/kernels.hpp"

namespace brt {

PairArrays scatter_gain(const PairArrays& projections, const MeasurementSet& ms) {
  const std::size_t n = ms.grid.size();
  if (projections.size() != ms.num_pairs()) throw GridMismatch("projections: wrong number of pairs");
  PairArrays gain(ms.num_pairs(), std::vector<double>(n));
  for (std::size_t i = 0; i < ms.num_pairs(); ++i) {
    const auto& proj = projections[i];
    auto& gi = gain[i];
#pragma omp parallel for schedule(static)
    for (std::size_t y = 0; y < n; ++y) gi[y] = ms.source.I0[y] * std::exp(-proj[y]);
  }
  return gain;
}

ScatterDerivatives scatter_derivatives(const Image& alpha, const PairArrays& gain,
                                       const MeasurementSet& ms) {
  const std::size_t n = ms.grid.size();
  ScatterDerivatives out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  bool zero_denominator = false;
#pragma omp parallel for schedule(static) reduction(|| : zero_denominator)
  for (std::size_t y = 0; y < n; ++y) {
    const double a = alpha.values[y];
    double g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < ms.num_pairs(); ++i) {
      if (ms.pairs[i].is_transmission || !ms.active[i][y]) continue;
      const double gd = gain[i][y], d = ms.counts[i][y];
      const double den = a * gd + ms.source.beta[i][y];
      g1 += gd;
      if (d > 0.0) {
        if (!(den > 0.0)) {
          zero_denominator = true;
          continue;
        }
        g1 -= d * gd / den;
        g2 += d * gd * gd / (den * den);
      }
    }
    out.gradient[y] = g1;
    out.curvature[y] = g2;
  }
  if (zero_denominator) throw ZeroDenominator("αġ + β vanishes where counts are positive");
  return out;
}

FamilyPoints family_points(const Image& alpha, const PairArrays& gain, const MeasurementSet& ms) {
  const std::size_t n = ms.grid.size(), P = ms.num_pairs();
  FamilyPoints fp;
  fp.q0.assign(P, std::vector<double>(n, 0.0));
  fp.q1 = fp.q0;
  fp.p0 = fp.q0;
  fp.p1 = fp.q0;
  bool zero_model = false;
  for (std::size_t i = 0; i < P; ++i) {
    const bool tx = ms.pairs[i].is_transmission;
    const auto& act = ms.active[i];
    const auto& beta = ms.source.beta[i];
    const auto& d = ms.counts[i];
    const auto& gi = gain[i];
#pragma omp parallel for schedule(static) reduction(|| : zero_model)
    for (std::size_t y = 0; y < n; ++y) {
      if (!act[y]) continue;
      const double q0 = beta[y];
      const double q1 = tx ? gi[y] : alpha.values[y] * gi[y];
      const double tot = q0 + q1;
      fp.q0[i][y] = q0;
      fp.q1[i][y] = q1;
      if (d[y] > 0.0) {
        if (!(tot > 0.0)) {
          zero_model = true;
          continue;
        }
        fp.p0[i][y] = d[y] * q0 / tot;
        fp.p1[i][y] = d[y] - fp.p0[i][y];
      }
    }
  }
  if (zero_model) throw ModelZeroWithData("model mean is zero where counts are positive");
  return fp;
}

AttenuationCoeffs attenuation_coeffs(const FamilyPoints& fp, const OperatorSet& ops, double Z0) {
  if (!(Z0 > 0.0) || !std::isfinite(Z0)) throw DegenerateOperator("Z0 must be positive and finite");
  AttenuationCoeffs c;
  c.Z0 = Z0;
  c.b1.assign(ops.grid().size(), 0.0);
  c.b2.assign(ops.grid().size(), 0.0);
  ops.adjoint_sum(fp.p1, c.b1);
  ops.adjoint_sum(fp.q1, c.b2);
  return c;
}

double dbar_constant(const FamilyPoints& fp, const PairArrays& projections, const MeasurementSet& ms) {
  double b0 = 0.0;
  const std::size_t n = ms.grid.size();
  for (std::size_t i = 0; i < ms.num_pairs(); ++i) {
    const auto& act = ms.active[i];
    b0 += ordered_sum(n, [&](std::size_t y) {
      if (!act[y]) return 0.0;
      const double p0 = fp.p0[i][y], p1 = fp.p1[i][y], q0 = fp.q0[i][y], q1 = fp.q1[i][y];
      double t = q0 + q1 - p0 - p1 - p1 * projections[i][y];
      if (p0 > 0.0) t += p0 * std::log(p0 / q0);
      if (p1 > 0.0) t += p1 * std::log(p1 / q1);
      return t;
    });
  }
  return b0;
}

std::pair<double, std::vector<double>> dbar(std::span<const double> mu, std::span<const double> mu_hat,
                                            const AttenuationCoeffs& c) {
  const std::size_t n = mu.size();
  std::vector<double> grad(n);
  const double Z0 = c.Z0;
  for (std::size_t x = 0; x < n; ++x) grad[x] = c.b1[x] - c.b2[x] * std::exp(-Z0 * (mu[x] - mu_hat[x]));
  const double v = ordered_sum(n, [&](std::size_t x) {
    const double e = std::expm1(-Z0 * (mu[x] - mu_hat[x]));
    return mu[x] * c.b1[x] + c.b2[x] / Z0 * e;
  });
  return {c.b0 + v, std::move(grad)};
}

std::pair<double, double> potential(double t, double delta) {
  const double r = t / delta;
  const double s = std::sqrt(1.0 + r * r);
  // δ²(s − 1) written as t²/(s + 1) to keep precision near 0.
  return {t * t / (s + 1.0), t / s};
}

double potential_ratio(double t, double delta) {
  const double r = t / delta;
  return 1.0 / std::sqrt(1.0 + r * r);
}

std::vector<NeighborOffset> eight_neighborhood() {
  const double d = 1.0 / std::sqrt(2.0);
  return {{-1, -1, d}, {-1, 0, 1.0}, {-1, 1, d}, {0, -1, 1.0},
          {0, 1, 1.0},  {1, -1, d},   {1, 0, 1.0}, {1, 1, d}};
}

namespace {

template <class F>
void for_neighbors(const ImageGrid& grid, const RegularizerSettings& s, std::size_t r, std::size_t c,
                   F&& f) {
  for (const auto& o : s.neighbors) {
    const long rr = static_cast<long>(r) + o.dr, cc = static_cast<long>(c) + o.dc;
    if (rr < 0 || cc < 0 || rr >= static_cast<long>(grid.L2) || cc >= static_cast<long>(grid.L1))
      continue;
    f(grid.index(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)), o.w);
  }
}

}  // namespace

double regularizer(std::span<const double> image, const ImageGrid& grid, const RegularizerSettings& s) {
  if (image.size() != grid.size()) throw GridMismatch("image size does not match grid");
  return ordered_sum(grid.size(), [&](std::size_t x) {
    const std::size_t r = x / grid.L1, c = x % grid.L1;
    double v = 0.0;
    for_neighbors(grid, s, r, c, [&](std::size_t z, double w) {
      v += w * potential(image[x] - image[z], s.delta).first;
    });
    return v;
  });
}

double regularizer(const Image& image, const RegularizerSettings& s) {
  return regularizer(image.values, image.grid, s);
}

RegCoeffs reg_coeffs(std::span<const double> hat, const ImageGrid& grid, const RegularizerSettings& s) {
  if (hat.size() != grid.size()) throw GridMismatch("image size does not match grid");
  RegCoeffs out;
  out.c1.assign(grid.size(), 0.0);
  out.c2.assign(grid.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const long r = static_cast<long>(x / grid.L1), c = static_cast<long>(x % grid.L1);
    double c1 = 0.0, c2 = 0.0;
    // z runs over N_x (x + o) and over the reverse neighbors (x − o).
    for (const auto& o : s.neighbors) {
      for (int sign : {1, -1}) {
        const long rr = r + sign * o.dr, cc = c + sign * o.dc;
        if (rr < 0 || cc < 0 || rr >= static_cast<long>(grid.L2) || cc >= static_cast<long>(grid.L1))
          continue;
        const double t = hat[x] - hat[grid.index(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc))];
        c1 += o.w * potential(t, s.delta).second;
        c2 += o.w * potential_ratio(t, s.delta);
      }
    }
    out.c1[x] = c1;
    out.c2[x] = c2;
  }
  out.c0 = regularizer(hat, grid, s);
  return out;
}

std::pair<double, std::vector<double>> rbar(std::span<const double> image, std::span<const double> hat,
                                            const RegCoeffs& c) {
  const std::size_t n = image.size();
  std::vector<double> grad(n);
  for (std::size_t x = 0; x < n; ++x) grad[x] = c.c1[x] + 2.0 * c.c2[x] * (image[x] - hat[x]);
  const double v = ordered_sum(n, [&](std::size_t x) {
    const double e = image[x] - hat[x];
    return c.c1[x] * e + c.c2[x] * e * e;
  });
  return {c.c0 + v, std::move(grad)};
}

}  // namespace brt
