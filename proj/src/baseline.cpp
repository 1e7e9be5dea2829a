#include <algorithm>
#include <cmath>

#include "brt/errors.hpp"
#include "brt/metrics.hpp"

namespace brt {

BaselineData baseline_preprocess(const MeasurementSet& ms, double d0) {
  const std::size_t n = ms.grid.size();
  BaselineData out;
  out.dbar.assign(ms.num_pairs(), std::vector<double>(n, 0.0));
  out.bhat = out.dbar;
  for (std::size_t i = 0; i < ms.num_pairs(); ++i)
    for (std::size_t y = 0; y < n; ++y) {
      const double d = ms.counts[i][y];
      if (!(d >= 0.0)) throw NegativeInput("counts must be nonnegative");
      const double db = std::max(d - ms.source.beta[i][y], d0);
      out.dbar[i][y] = db;
      out.bhat[i][y] = -std::log(db) + std::log(ms.source.I0[y]);
    }
  return out;
}

Image baseline_scatter(const BaselineData& pre, const MeasurementSet& ms, const Image* mu_hat,
                       const OperatorSet* ops) {
  const std::size_t n = ms.grid.size();
  PairArrays proj;
  if (mu_hat) {
    if (!ops) throw GridMismatch("an attenuation estimate needs operators");
    if (!(mu_hat->grid == ms.grid)) throw GridMismatch("attenuation estimate grid differs from data grid");
    ops->forward_all(mu_hat->values, proj);
  }
  Image out(ms.grid, ImageKind::Scatter);
  std::size_t count = 0;
  for (std::size_t i = 0; i < ms.num_pairs(); ++i) {
    if (ms.pairs[i].is_transmission) continue;
    ++count;
    for (std::size_t y = 0; y < n; ++y) {
      const double atten = mu_hat ? std::exp(proj[i][y]) : 1.0;
      out.values[y] += pre.dbar[i][y] / ms.source.I0[y] * atten;
    }
  }
  for (double& v : out.values) v = std::clamp(count ? v / static_cast<double>(count) : 0.0, 0.0, 1.0);
  return out;
}

}  // namespace brt
