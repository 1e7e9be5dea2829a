#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "brt/errors.hpp"
#include "brt/forward_model.hpp"
#include "brt/surrogates.hpp"

namespace brt {

struct SolverConfig {
  double lambda_alpha = 0.0;
  double lambda_mu = 0.0;
  double delta = 0.01;
  int max_outer_iters = 500;
  double stop_tol = 1e-7;     // relative change of J over one iteration
  double newton_tol = 1e-10;  // residual tolerance, relative to the residual's scale
  int newton_max = 50;
  double mu_max = 10.0;       // used where no counts constrain a pixel
  double monotonicity_tol = 1e-9;
  bool freeze_alpha = false;
  bool freeze_mu = false;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  RegularizerSettings regularizer() const;
};

struct TraceEntry {
  int iter = 0;
  int half = 0;  // 0 initial, 1 after scatter update, 2 after attenuation update
  ObjectiveParts parts;
  double wall_ms = 0.0;
};

struct ReconResult {
  Image alpha;
  Image mu;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  bool converged = false;
};

/// Residual value, derivative and magnitude scale at one point.
struct Residual {
  double f = 0.0;
  double df = 0.0;
  double scale = 1.0;
};

/// Root of an increasing residual on [lo, hi] with f(lo) < 0 < f(hi), by
/// Newton steps that fall back to bisection whenever a step leaves the
/// bracket. Converges when |f| ≤ tol·scale or the bracket collapses to
/// adjacent doubles. `f` maps a point to a Residual.
template <class F>
double solve_pixel_1d(F&& f, double lo, double hi, double x0, double tol, int max_iter) {
  if (!(lo < hi)) throw RootSolveFailure("empty bracket");
  double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
  // Newton for max_iter steps, then bisection only; bisection over the full
  // double range needs at most a few thousand halvings.
  for (int it = 0; it < max_iter + 4096; ++it) {
    const Residual r = f(x);
    if (!std::isfinite(r.f)) throw RootSolveFailure("residual is not finite");
    if (std::abs(r.f) <= tol * r.scale) return x;
    (r.f < 0.0 ? lo : hi) = x;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return r.f < 0.0 ? hi : lo;
    double next = (it < max_iter && r.df > 0.0) ? x - r.f / r.df : mid;
    if (!(next > lo && next < hi)) next = mid;
    x = next;
  }
  throw RootSolveFailure("root solve did not converge");
}

/// Upper end of a bracket for an increasing residual: doubles `start` until
/// f > 0. Throws RootSolveFailure if it never turns positive.
template <class F>
double grow_bracket(F&& f, double start) {
  double hi = start > 0.0 ? start : 1.0;
  for (int k = 0; k < 2000; ++k) {
    if (f(hi).f > 0.0) return hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) break;
  }
  throw RootSolveFailure("could not bracket the root");
}

/// One scatter half step with μ̂ fixed; gain = ġ(μ̂).
Image scatter_update(const Image& alpha_hat, const PairArrays& gain, const MeasurementSet& ms,
                     const SolverConfig& cfg);
Image scatter_update(const Image& alpha_hat, const Image& mu_hat, const MeasurementSet& ms,
                     const OperatorSet& ops, const SolverConfig& cfg);

/// One attenuation half step with α fixed; projections = Bμ̂.
Image attenuation_update(const Image& alpha, const Image& mu_hat, const PairArrays& projections,
                         const MeasurementSet& ms, const OperatorSet& ops, double Z0,
                         const SolverConfig& cfg);
Image attenuation_update(const Image& alpha, const Image& mu_hat, const MeasurementSet& ms,
                         const OperatorSet& ops, const SolverConfig& cfg);

using ProgressFn = std::function<void(const TraceEntry&)>;

/// Alternates scatter and attenuation half steps, recording J after each.
/// Throws MonotonicityViolation if J rises by more than monotonicity_tol·|J|
/// (or by more than rounding in the data-fidelity sum, when J is near zero).
ReconResult joint_estimate(const Image& alpha0, const Image& mu0, const MeasurementSet& ms,
                           const OperatorSet& ops, const SolverConfig& cfg,
                           const ProgressFn& progress = {});

}  // namespace brt
