#include "brt/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "brt/errors.hpp"
#include "brt/kernels.hpp"

namespace brt {

double ssim(const Image& a, const Image& b) {
  if (!(a.grid == b.grid)) throw GridMismatch("ssim needs images on the same grid");
  const ImageGrid& g = a.grid;
  const std::size_t W1 = std::min<std::size_t>(8, g.L1), W2 = std::min<std::size_t>(8, g.L2);

  std::vector<double> w(W1 * W2);
  double wsum = 0.0;
  const double sigma = 1.5;
  for (std::size_t i = 0; i < W2; ++i)
    for (std::size_t j = 0; j < W1; ++j) {
      const double di = static_cast<double>(i) - 0.5 * static_cast<double>(W2 - 1);
      const double dj = static_cast<double>(j) - 0.5 * static_cast<double>(W1 - 1);
      w[i * W1 + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      wsum += w[i * W1 + j];
    }
  for (double& v : w) v /= wsum;

  double L = std::max(*std::max_element(a.values.begin(), a.values.end()),
                      *std::max_element(b.values.begin(), b.values.end()));
  if (!(L > 0.0)) {
    L = 0.0;
    for (double v : a.values) L = std::max(L, std::abs(v));
    for (double v : b.values) L = std::max(L, std::abs(v));
  }
  if (!(L > 0.0)) L = 1.0;
  const double C1 = (0.01 * L) * (0.01 * L), C2 = (0.03 * L) * (0.03 * L);

  const std::size_t R = g.L2 - W2 + 1, C = g.L1 - W1 + 1;
  const double total = ordered_sum(R * C, [&](std::size_t k) {
    const std::size_t r0 = k / C, c0 = k % C;
    double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < W2; ++i)
      for (std::size_t j = 0; j < W1; ++j) {
        const double wt = w[i * W1 + j];
        const double va = a.at(r0 + i, c0 + j), vb = b.at(r0 + i, c0 + j);
        ma += wt * va;
        mb += wt * vb;
        saa += wt * va * va;
        sbb += wt * vb * vb;
        sab += wt * va * vb;
      }
    const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
    return ((2 * ma * mb + C1) * (2 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
  });
  return total / static_cast<double>(R * C);
}

}  // namespace brt
