#include "brt/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "brt/errors.hpp"

namespace brt {

void SolverConfig::validate() const {
  if (!(lambda_alpha >= 0.0) || !(lambda_mu >= 0.0)) throw ConfigError("lambdas must be nonnegative");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (max_outer_iters < 0) throw ConfigError("max_outer_iters must be nonnegative");
  if (!(stop_tol > 0.0) || !(newton_tol > 0.0) || !(monotonicity_tol > 0.0))
    throw ConfigError("tolerances must be positive");
  if (newton_max <= 0) throw ConfigError("newton_max must be positive");
  if (!(mu_max > 0.0)) throw ConfigError("mu_max must be positive");
}

RegularizerSettings SolverConfig::regularizer() const {
  RegularizerSettings r;
  r.delta = delta;
  return r;
}

Image scatter_update(const Image& alpha_hat, const PairArrays& gain, const MeasurementSet& ms,
                     const SolverConfig& cfg) {
  const std::size_t n = ms.grid.size();
  if (!(alpha_hat.grid == ms.grid)) throw GridMismatch("scatter image grid differs from data grid");
  const double lam = cfg.lambda_alpha;
  RegCoeffs rc;
  if (lam > 0.0) rc = reg_coeffs(alpha_hat.values, ms.grid, cfg.regularizer());

  std::vector<std::size_t> scatter;
  for (std::size_t i = 0; i < ms.num_pairs(); ++i)
    if (!ms.pairs[i].is_transmission) scatter.push_back(i);

  Image out(ms.grid, ImageKind::Scatter);
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 512) reduction(|| : failed)
  for (std::size_t y = 0; y < n; ++y) {
    const double ah = alpha_hat.values[y];
    const double c1 = lam > 0.0 ? lam * rc.c1[y] : 0.0;
    const double c2 = lam > 0.0 ? lam * rc.c2[y] : 0.0;
    auto residual = [&](double a) {
      Residual r;
      r.f = c1 + 2.0 * c2 * (a - ah);
      r.df = 2.0 * c2;
      r.scale = std::abs(c1) + 2.0 * c2 * std::abs(a - ah);
      for (std::size_t i : scatter) {
        if (!ms.active[i][y]) continue;
        const double g = gain[i][y], d = ms.counts[i][y];
        const double den = a * g + ms.source.beta[i][y];
        r.f += g;
        r.scale += g;
        if (d > 0.0) {
          r.f -= d * g / den;
          r.df += d * g * g / (den * den);
          r.scale += d * g / den;
        }
      }
      return r;
    };

    // Boundary solutions: the surrogate is convex in α(y), so its minimizer
    // over [0, 1] sits at an end whenever the residual keeps one sign.
    bool infinite_at_zero = false;
    std::size_t terms = 0;
    for (std::size_t i : scatter) {
      if (!ms.active[i][y]) continue;
      ++terms;
      if (ms.counts[i][y] > 0.0 && ms.source.beta[i][y] == 0.0) infinite_at_zero = true;
    }
    if (!infinite_at_zero && residual(0.0).f >= 0.0) {
      out.values[y] = 0.0;
      continue;
    }
    if (residual(1.0).f <= 0.0) {
      out.values[y] = 1.0;
      continue;
    }

    double guess = ah;
    if (terms == 1) {
      std::size_t i = 0;
      for (std::size_t k : scatter)
        if (ms.active[k][y]) i = k;
      const double g = gain[i][y], d = ms.counts[i][y], b = ms.source.beta[i][y];
      if (c2 == 0.0 && c1 == 0.0) {
        out.values[y] = (d - b) / g;
        continue;
      }
      // (m + k·a)(a·g + b) = d·g, largest root.
      const double k = 2.0 * c2, m = g + c1 - 2.0 * c2 * ah;
      const double A = k * g, B = k * b + m * g, C = m * b - d * g;
      const double disc = std::max(0.0, B * B - 4.0 * A * C);
      const double sq = std::sqrt(disc);
      guess = B >= 0.0 ? (2.0 * C) / (-B - sq) : (-B + sq) / (2.0 * A);
    }
    try {
      out.values[y] = solve_pixel_1d(residual, 0.0, 1.0, guess, cfg.newton_tol, cfg.newton_max);
    } catch (const RootSolveFailure&) {
      failed = true;
    }
  }
  if (failed) throw RootSolveFailure("scatter update: root solve failed");
  return out;
}

Image scatter_update(const Image& alpha_hat, const Image& mu_hat, const MeasurementSet& ms,
                     const OperatorSet& ops, const SolverConfig& cfg) {
  PairArrays proj;
  ops.forward_all(mu_hat.values, proj);
  return scatter_update(alpha_hat, scatter_gain(proj, ms), ms, cfg);
}

Image attenuation_update(const Image& alpha, const Image& mu_hat, const PairArrays& projections,
                         const MeasurementSet& ms, const OperatorSet& ops, double Z0,
                         const SolverConfig& cfg) {
  const std::size_t n = ms.grid.size();
  if (!(mu_hat.grid == ms.grid)) throw GridMismatch("attenuation image grid differs from data grid");
  const FamilyPoints fp = family_points(alpha, scatter_gain(projections, ms), ms);
  const AttenuationCoeffs ac = attenuation_coeffs(fp, ops, Z0);
  const double lam = cfg.lambda_mu;
  RegCoeffs rc;
  if (lam > 0.0) rc = reg_coeffs(mu_hat.values, ms.grid, cfg.regularizer());

  Image out(ms.grid, ImageKind::Attenuation);
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 512) reduction(|| : failed)
  for (std::size_t x = 0; x < n; ++x) {
    const double mh = mu_hat.values[x];
    const double b1 = ac.b1[x], b2 = ac.b2[x];
    const double c1 = lam > 0.0 ? lam * rc.c1[x] : 0.0;
    const double c2 = lam > 0.0 ? lam * rc.c2[x] : 0.0;
    auto residual = [&](double m) {
      const double e = b2 * std::exp(-Z0 * (m - mh));
      Residual r;
      r.f = b1 - e + c1 + 2.0 * c2 * (m - mh);
      r.df = Z0 * e + 2.0 * c2;
      r.scale = std::abs(b1) + e + std::abs(c1) + 2.0 * c2 * std::abs(m - mh);
      return r;
    };

    if (lam == 0.0 && b1 == 0.0 && b2 == 0.0) {
      out.values[x] = mh;
      continue;
    }
    if (residual(0.0).f >= 0.0) {
      out.values[x] = 0.0;
      continue;
    }
    if (lam == 0.0) {
      // No counts constrain this pixel; the likelihood keeps falling as μ grows.
      out.values[x] = b1 > 0.0 ? mh + std::log(b2 / b1) / Z0 : cfg.mu_max;
      continue;
    }
    try {
      double guess = mh;
      if (b1 > 0.0 && b2 > 0.0) guess = std::max(0.0, mh + std::log(b2 / b1) / Z0);
      const double hi = grow_bracket(residual, std::max({2.0 * mh, guess * 2.0, 1e-3}));
      out.values[x] = solve_pixel_1d(residual, 0.0, hi, guess, cfg.newton_tol, cfg.newton_max);
    } catch (const RootSolveFailure&) {
      failed = true;
    }
  }
  if (failed) throw RootSolveFailure("attenuation update: root solve failed");
  return out;
}

Image attenuation_update(const Image& alpha, const Image& mu_hat, const MeasurementSet& ms,
                         const OperatorSet& ops, const SolverConfig& cfg) {
  PairArrays proj;
  ops.forward_all(mu_hat.values, proj);
  return attenuation_update(alpha, mu_hat, proj, ms, ops, row_sum_max(ops), cfg);
}

namespace {

// floor: rounding level of a sum of divergence terms, for J near zero.
void check_descent(double before, double after, double tol, double floor, int iter, const char* half) {
  if (after > before + std::max(tol * std::abs(before), floor)) {
    std::ostringstream os;
    os.precision(17);
    os << "objective increased in iteration " << iter << " (" << half << "): " << before << " -> "
       << after;
    throw MonotonicityViolation(os.str());
  }
}

}  // namespace

ReconResult joint_estimate(const Image& alpha0, const Image& mu0, const MeasurementSet& ms,
                           const OperatorSet& ops, const SolverConfig& cfg,
                           const ProgressFn& progress) {
  cfg.validate();
  ms.validate();
  if (!(alpha0.grid == ms.grid) || !(mu0.grid == ms.grid) || !(ops.grid() == ms.grid))
    throw GridMismatch("images, data and operators must share one grid");
  if (ops.size() != ms.num_pairs()) throw GridMismatch("one operator per pair is required");
  alpha0.check_constraints();
  mu0.check_constraints();

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  const RegularizerSettings reg = cfg.regularizer();

  ReconResult res;
  res.alpha = alpha0;
  res.alpha.kind = ImageKind::Scatter;
  res.mu = mu0;
  res.mu.kind = ImageKind::Attenuation;

  PairArrays proj;
  ops.forward_all(res.mu.values, proj);
  const double Z0 = cfg.freeze_mu ? 0.0 : row_sum_max(ops);

  auto record = [&](int iter, int half) {
    TraceEntry e{iter, half,
                 objective(ms, res.alpha, res.mu, proj, cfg.lambda_alpha, cfg.lambda_mu, reg),
                 elapsed_ms()};
    res.trace.push_back(e);
    if (progress) progress(e);
    return e.parts.J;
  };

  double J = record(0, 0);
  double total = 0.0;
  for (std::size_t i = 0; i < ms.num_pairs(); ++i)
    for (std::size_t y = 0; y < ms.grid.size(); ++y)
      if (ms.active[i][y]) total += ms.counts[i][y];
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * total;
  if (cfg.freeze_alpha && cfg.freeze_mu) {
    res.converged = true;
    return res;
  }
  for (int k = 1; k <= cfg.max_outer_iters; ++k) {
    const double J_start = J;
    if (!cfg.freeze_alpha) {
      res.alpha = scatter_update(res.alpha, scatter_gain(proj, ms), ms, cfg);
      const double J1 = record(k, 1);
      check_descent(J, J1, cfg.monotonicity_tol, floor, k, "scatter update");
      J = J1;
    }
    if (!cfg.freeze_mu) {
      Image mu = attenuation_update(res.alpha, res.mu, proj, ms, ops, Z0, cfg);
      res.mu = std::move(mu);
      ops.forward_all(res.mu.values, proj);
      const double J2 = record(k, 2);
      check_descent(J, J2, cfg.monotonicity_tol, floor, k, "attenuation update");
      J = J2;
    }
    res.iterations = k;
    const double denom = std::max(std::abs(J_start), std::numeric_limits<double>::min());
    if (std::abs(J_start - J) <= cfg.stop_tol * denom) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace brt
