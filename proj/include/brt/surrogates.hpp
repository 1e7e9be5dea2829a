#pragma once

#include <span>
#include <utility>
#include <vector>

#include "brt/forward_model.hpp"

namespace brt {

// ---- scatter fidelity -------------------------------------------------------

/// ġ_i(y) = I0(y)·exp(−(B_i μ)(y)) for every pair.
PairArrays scatter_gain(const PairArrays& projections, const MeasurementSet& ms);

struct ScatterDerivatives {
  std::vector<double> gradient;   // per y
  std::vector<double> curvature;  // per y
};

/// First and second derivative of I(d‖g) in α(y), summed over scatter pairs.
/// Throws ZeroDenominator if αġ + β = 0 where d > 0.
ScatterDerivatives scatter_derivatives(const Image& alpha, const PairArrays& gain,
                                       const MeasurementSet& ms);

// ---- attenuation fidelity ---------------------------------------------------

/// Two-component split of the mean counts (E = 0 background, E = 1 signal)
/// and its projection onto the data marginals.
struct FamilyPoints {
  PairArrays q0, q1;  // q̂: background β and signal I0·α·exp(−Bμ̂)
  PairArrays p0, p1;  // p̂ = d·q̂ / Σ_E q̂
};

/// Transmission pairs use α ≡ 1. Zero off the active sets. Throws
/// ModelZeroWithData if Σ_E q̂ = 0 where d > 0.
FamilyPoints family_points(const Image& alpha, const PairArrays& gain, const MeasurementSet& ms);

struct AttenuationCoeffs {
  double b0 = 0.0;  // only filled by dbar_constant
  std::vector<double> b1, b2;
  double Z0 = 0.0;
};

/// b1 = Σ_i B_iᵀ p̂_i(·,1), b2 = Σ_i B_iᵀ q̂_i(·,1).
AttenuationCoeffs attenuation_coeffs(const FamilyPoints& fp, const OperatorSet& ops, double Z0);

/// Constant term b0 = d0(μ̂) + Σ q̂(·,1) of the surrogate; needs B μ̂.
double dbar_constant(const FamilyPoints& fp, const PairArrays& projections, const MeasurementSet& ms);

/// Surrogate value and gradient at μ, expanded at μ̂.
std::pair<double, std::vector<double>> dbar(std::span<const double> mu, std::span<const double> mu_hat,
                                            const AttenuationCoeffs& c);

// ---- regularization ---------------------------------------------------------

/// Hyperbola potential φ(t) = δ²(√(1+(t/δ)²) − 1) and its derivative.
std::pair<double, double> potential(double t, double delta);
/// φ̇(t)/t, equal to 1 at t = 0.
double potential_ratio(double t, double delta);

struct NeighborOffset {
  int dr, dc;
  double w;
};

/// 8-connected neighborhood: weight 1 on axes, 1/√2 on diagonals.
std::vector<NeighborOffset> eight_neighborhood();

struct RegularizerSettings {
  double delta = 0.01;
  std::vector<NeighborOffset> neighbors = eight_neighborhood();
};

/// R = Σ_x Σ_{z ∈ N_x} w(x,z) φ(image(x) − image(z)); neighbors outside the
/// grid are dropped.
double regularizer(std::span<const double> image, const ImageGrid& grid, const RegularizerSettings& s);
double regularizer(const Image& image, const RegularizerSettings& s);

struct RegCoeffs {
  double c0 = 0.0;
  std::vector<double> c1, c2;
};

/// Separable quadratic majorizer of R expanded at `hat`; c1 and c2 sum over
/// both N_x and the reverse neighbor set {z : x ∈ N_z}.
RegCoeffs reg_coeffs(std::span<const double> hat, const ImageGrid& grid, const RegularizerSettings& s);

std::pair<double, std::vector<double>> rbar(std::span<const double> image, std::span<const double> hat,
                                            const RegCoeffs& c);

}  // namespace brt
