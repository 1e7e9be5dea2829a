#include "brt/forward_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "brt/errors.hpp"
#include "brt/kernels.hpp"
#include "brt/surrogates.hpp"

namespace brt {
namespace {

// SplitMix64 finalizer; used to derive one independent stream per sample.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct SplitMix64 {
  using result_type = std::uint64_t;
  std::uint64_t state;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }
  result_type operator()() {
    state += 0x9e3779b97f4a7c15ULL;
    return mix(state - 0x9e3779b97f4a7c15ULL);
  }
};

void check_pair_arrays(const PairArrays& a, std::size_t pairs, std::size_t n, const char* what) {
  if (a.size() != pairs) throw GridMismatch(std::string(what) + ": wrong number of pairs");
  for (const auto& v : a)
    if (v.size() != n) throw GridMismatch(std::string(what) + ": wrong number of samples");
}

}  // namespace

void MeasurementSet::validate() const {
  const std::size_t n = grid.size(), P = pairs.size();
  if (active.size() != P) throw GridMismatch("active sets: wrong number of pairs");
  for (const auto& a : active)
    if (a.size() != n) throw GridMismatch("active sets: wrong number of samples");
  check_pair_arrays(counts, P, n, "counts");
  check_pair_arrays(source.beta, P, n, "background");
  if (source.I0.size() != n) throw GridMismatch("source intensity: wrong number of samples");
  for (double v : source.I0)
    if (!(v > 0.0) || !std::isfinite(v)) throw NegativeInput("source intensity must be positive");
  for (std::size_t i = 0; i < P; ++i)
    for (std::size_t y = 0; y < n; ++y) {
      if (!(source.beta[i][y] >= 0.0) || !std::isfinite(source.beta[i][y]))
        throw NegativeInput("background must be nonnegative");
      if (!(counts[i][y] >= 0.0) || !std::isfinite(counts[i][y]))
        throw NegativeInput("counts must be nonnegative");
      if (!active[i][y] && counts[i][y] != 0.0)
        throw NegativeInput("counts must be zero outside the active set");
    }
}

std::vector<std::uint8_t> active_set(const ImageGrid& grid, const SourceDetectorPair& pair) {
  std::vector<std::uint8_t> m(grid.size(), 1);
  if (!pair.is_transmission) return m;
  const Direction d = pair.theta_d;
  const bool horizontal = d.uy == 0.0 && std::abs(d.ux) == 1.0;
  const bool vertical = d.ux == 0.0 && std::abs(d.uy) == 1.0;
  if (!horizontal && !vertical) return m;
  std::fill(m.begin(), m.end(), 0);
  if (horizontal) {
    const std::size_t c = d.ux > 0 ? grid.L1 - 1 : 0;
    for (std::size_t r = 0; r < grid.L2; ++r) m[grid.index(r, c)] = 1;
  } else {
    const std::size_t r = d.uy > 0 ? grid.L2 - 1 : 0;
    for (std::size_t c = 0; c < grid.L1; ++c) m[grid.index(r, c)] = 1;
  }
  return m;
}

MeasurementSet make_measurement_set(const ImageGrid& grid, std::vector<SourceDetectorPair> pairs,
                                    double I0, double beta) {
  MeasurementSet ms;
  ms.grid = grid;
  ms.pairs = std::move(pairs);
  const std::size_t n = grid.size();
  ms.source.I0.assign(n, I0);
  for (const auto& p : ms.pairs) {
    auto a = active_set(grid, p);
    std::vector<double> b(n, 0.0);
    for (std::size_t y = 0; y < n; ++y)
      if (a[y]) b[y] = beta;
    ms.source.beta.push_back(std::move(b));
    ms.counts.emplace_back(n, 0.0);
    ms.active.push_back(std::move(a));
  }
  return ms;
}

MeanCounts mean_counts_from_projections(const Image& alpha, const PairArrays& projections,
                                        const MeasurementSet& ms) {
  const std::size_t n = ms.grid.size();
  if (!(alpha.grid == ms.grid)) throw GridMismatch("scatter image grid differs from data grid");
  check_pair_arrays(projections, ms.num_pairs(), n, "projections");
  MeanCounts out;
  out.g.assign(ms.num_pairs(), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < ms.num_pairs(); ++i) {
    const bool tx = ms.pairs[i].is_transmission;
    const auto& act = ms.active[i];
    const auto& beta = ms.source.beta[i];
    const auto& proj = projections[i];
    auto& g = out.g[i];
#pragma omp parallel for schedule(static)
    for (std::size_t y = 0; y < n; ++y) {
      if (!act[y]) continue;
      const double signal = ms.source.I0[y] * std::exp(-proj[y]);
      g[y] = beta[y] + (tx ? signal : alpha.values[y] * signal);
    }
  }
  return out;
}

MeanCounts mean_counts(const Image& alpha, const Image& mu, const MeasurementSet& ms,
                       const OperatorSet& ops) {
  if (!(mu.grid == ms.grid)) throw GridMismatch("attenuation image grid differs from data grid");
  alpha.check_constraints();
  mu.check_constraints();
  PairArrays proj;
  ops.forward_all(mu.values, proj);
  return mean_counts_from_projections(alpha, proj, ms);
}

PairArrays simulate(const MeanCounts& g, std::uint64_t seed) {
  PairArrays d(g.g.size());
  for (std::size_t i = 0; i < g.g.size(); ++i) {
    const auto& gi = g.g[i];
    auto& di = d[i];
    di.assign(gi.size(), 0.0);
    const std::uint64_t key = mix(seed ^ mix(i + 1));
#pragma omp parallel for schedule(static)
    for (std::size_t y = 0; y < gi.size(); ++y) {
      if (!(gi[y] > 0.0)) continue;
      SplitMix64 eng{mix(key ^ mix(y))};
      std::poisson_distribution<long long> pd(gi[y]);
      di[y] = static_cast<double>(pd(eng));
    }
  }
  return d;
}

namespace {

template <class Term>
double sum_pairs(const PairArrays& d, const PairArrays& g,
                 const std::vector<std::vector<std::uint8_t>>& active, Term term) {
  if (d.size() != g.size() || d.size() != active.size())
    throw GridMismatch("data and model have different pair counts");
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto &di = d[i], &gi = g[i];
    const auto& ai = active[i];
    if (di.size() != gi.size() || di.size() != ai.size())
      throw GridMismatch("data and model have different sizes");
    for (std::size_t y = 0; y < di.size(); ++y)
      if (ai[y] && di[y] > 0.0 && !(gi[y] > 0.0))
        throw ModelZeroWithData("model mean is zero where counts are positive");
    total += ordered_sum(di.size(), [&](std::size_t y) { return ai[y] ? term(di[y], gi[y]) : 0.0; });
  }
  return total;
}

}  // namespace

double i_divergence(const PairArrays& d, const PairArrays& g,
                    const std::vector<std::vector<std::uint8_t>>& active) {
  return sum_pairs(d, g, active, [](double dv, double gv) {
    return dv > 0.0 ? dv * std::log(dv / gv) - dv + gv : gv;
  });
}

double log_likelihood(const PairArrays& d, const PairArrays& g,
                      const std::vector<std::vector<std::uint8_t>>& active) {
  return sum_pairs(d, g, active, [](double dv, double gv) {
    return dv > 0.0 ? dv * std::log(gv) - gv : -gv;
  });
}

ObjectiveParts objective(const MeasurementSet& ms, const Image& alpha, const Image& mu,
                         const PairArrays& projections, double lambda_alpha, double lambda_mu,
                         const RegularizerSettings& reg) {
  ObjectiveParts o;
  const MeanCounts g = mean_counts_from_projections(alpha, projections, ms);
  o.i_div = i_divergence(ms.counts, g.g, ms.active);
  o.r_alpha = regularizer(alpha, reg);
  o.r_mu = regularizer(mu, reg);
  o.J = o.i_div + lambda_alpha * o.r_alpha + lambda_mu * o.r_mu;
  return o;
}

ObjectiveParts objective(const MeasurementSet& ms, const Image& alpha, const Image& mu,
                         const OperatorSet& ops, double lambda_alpha, double lambda_mu,
                         const RegularizerSettings& reg) {
  PairArrays proj;
  ops.forward_all(mu.values, proj);
  return objective(ms, alpha, mu, proj, lambda_alpha, lambda_mu, reg);
}

}  // namespace brt
