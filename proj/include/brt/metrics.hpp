#pragma once

#include "brt/forward_model.hpp"
#include "brt/geometry.hpp"

namespace brt {

/// Mean structural similarity over all valid 8×8 Gaussian windows (σ = 1.5),
/// with C1 = (0.01·L)², C2 = (0.03·L)² and L the largest value in either
/// image.
double ssim(const Image& a, const Image& b);

struct BaselineData {
  PairArrays dbar;   // max(d − β, d0)
  PairArrays bhat;   // −ln d̄ + ln I0
};

/// Thresholds the counts and converts them to log data, per pair.
BaselineData baseline_preprocess(const MeasurementSet& ms, double d0 = 1.0);

/// α̂(y) = mean over scatter pairs of d̄_i(y)/I0(y)·exp((B_i μ̂)(y)), clamped
/// to [0, 1]. Pass mu_hat = nullptr for zero attenuation.
Image baseline_scatter(const BaselineData& pre, const MeasurementSet& ms, const Image* mu_hat,
                       const OperatorSet* ops);

}  // namespace brt
