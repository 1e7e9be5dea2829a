#pragma once

#include <cstdint>
#include <vector>

#include "brt/geometry.hpp"
#include "brt/operators.hpp"

namespace brt {

/// Per-pair, per-sample array: values[i][y].
using PairArrays = std::vector<std::vector<double>>;

struct SourceModel {
  std::vector<double> I0;  // per scatter location, > 0
  PairArrays beta;         // per pair and location, ≥ 0
};

struct MeasurementSet {
  ImageGrid grid;
  std::vector<SourceDetectorPair> pairs;
  std::vector<std::vector<std::uint8_t>> active;  // Y_i as a mask
  PairArrays counts;                               // d_i(y), zero off Y_i
  SourceModel source;

  std::size_t num_pairs() const { return pairs.size(); }
  /// Throws GridMismatch / NegativeInput when sizes or signs are wrong.
  void validate() const;
};

/// Y_i for one pair. Scatter pairs use every sample. An axis-aligned
/// transmission pair keeps one sample per line: the pixel on the detector
/// edge, whose broken ray is the full line through the grid. Other
/// transmission directions keep every sample.
std::vector<std::uint8_t> active_set(const ImageGrid& grid, const SourceDetectorPair& pair);

/// Measurement set with zero counts, constant I0 and β, and the default
/// active sets.
MeasurementSet make_measurement_set(const ImageGrid& grid, std::vector<SourceDetectorPair> pairs,
                                    double I0, double beta);

struct MeanCounts {
  PairArrays g;
};

/// g from precomputed projections Bμ (one array per pair).
MeanCounts mean_counts_from_projections(const Image& alpha, const PairArrays& projections,
                                        const MeasurementSet& ms);
MeanCounts mean_counts(const Image& alpha, const Image& mu, const MeasurementSet& ms,
                       const OperatorSet& ops);

/// Independent Poisson draws d_i(y) ~ Poisson(g_i(y)); each draw uses its own
/// generator keyed by (seed, i, y), so the result does not depend on the
/// evaluation order or thread count.
PairArrays simulate(const MeanCounts& g, std::uint64_t seed);

/// Σ d ln(d/g) − d + g over the active sets, with 0·ln 0 = 0.
double i_divergence(const PairArrays& d, const PairArrays& g,
                    const std::vector<std::vector<std::uint8_t>>& active);
/// Σ d ln g − g over the active sets.
double log_likelihood(const PairArrays& d, const PairArrays& g,
                      const std::vector<std::vector<std::uint8_t>>& active);

struct RegularizerSettings;

struct ObjectiveParts {
  double J = 0.0;
  double i_div = 0.0;
  double r_alpha = 0.0;
  double r_mu = 0.0;
};

ObjectiveParts objective(const MeasurementSet& ms, const Image& alpha, const Image& mu,
                         const PairArrays& projections, double lambda_alpha, double lambda_mu,
                         const RegularizerSettings& reg);
ObjectiveParts objective(const MeasurementSet& ms, const Image& alpha, const Image& mu,
                         const OperatorSet& ops, double lambda_alpha, double lambda_mu,
                         const RegularizerSettings& reg);

}  // namespace brt
