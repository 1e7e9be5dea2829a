#include <algorithm>
#include <cmath>
#include <map>

#include "brt/errors.hpp"
#include "fft_plans.hpp"

namespace brt {

OperatorSet::OperatorSet(const ImageGrid& grid, std::vector<std::unique_ptr<BrtOperator>> ops)
    : grid_(grid), ops_(std::move(ops)) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> by_size;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    if (!(ops_[i]->grid() == grid_)) throw GridMismatch("operator grid differs from set grid");
    if (ops_[i]->realization() == Realization::Direct) {
      direct_.push_back(i);
      continue;
    }
    const auto& f = static_cast<const FourierOperator&>(*ops_[i]);
    auto [it, fresh] = by_size.try_emplace({f.N1(), f.N2()}, groups_.size());
    if (fresh) groups_.emplace_back();
    groups_[it->second].members.push_back(i);
  }
}

void OperatorSet::forward_all(std::span<const double> mu,
                              std::vector<std::vector<double>>& out) const {
  if (mu.size() != grid_.size()) throw GridMismatch("image size does not match operator set grid");
  out.resize(ops_.size());
  for (auto& o : out) o.resize(grid_.size());
  for (std::size_t i : direct_) ops_[i]->forward(mu, out[i]);

  for (const auto& g : groups_) {
    const auto& first = static_cast<const FourierOperator&>(*ops_[g.members.front()]);
    const auto& plans = first.plans();
    fft::Workspace shared(plans);
    fft::forward_spectrum(plans, mu, shared);
    const std::size_t nbins = plans.N2 * plans.M;
    const std::complex<double>* X = shared.spectrum();
#pragma omp parallel
    {
      fft::Workspace ws(plans);
#pragma omp for schedule(dynamic, 1)
      for (std::size_t m = 0; m < g.members.size(); ++m) {
        const std::size_t i = g.members[m];
        const auto& H = static_cast<const FourierOperator&>(*ops_[i]).half_filter();
        std::complex<double>* Y = ws.spectrum();
        for (std::size_t k = 0; k < nbins; ++k) Y[k] = X[k] * H[k];
        fft::inverse_crop(plans, ws, out[i]);
      }
    }
  }
}

void OperatorSet::adjoint_sum(const std::vector<std::vector<double>>& p, std::span<double> out) const {
  if (p.size() != ops_.size()) throw GridMismatch("adjoint input count differs from pair count");
  if (out.size() != grid_.size()) throw GridMismatch("output size does not match operator set grid");
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> tmp(grid_.size());
  for (std::size_t i : direct_) {
    if (p[i].empty()) continue;
    ops_[i]->adjoint(p[i], tmp);
    for (std::size_t x = 0; x < tmp.size(); ++x) out[x] += tmp[x];
  }

  for (const auto& g : groups_) {
    const auto& first = static_cast<const FourierOperator&>(*ops_[g.members.front()]);
    const auto& plans = first.plans();
    const std::size_t nbins = plans.N2 * plans.M;
    fft::Workspace ws(plans);
    std::vector<std::complex<double>> acc(nbins, {0.0, 0.0});
    bool any = false;
    for (std::size_t i : g.members) {
      if (p[i].empty()) continue;
      any = true;
      fft::forward_spectrum(plans, p[i], ws);
      const auto& H = static_cast<const FourierOperator&>(*ops_[i]).half_filter();
      const std::complex<double>* X = ws.spectrum();
#pragma omp parallel for schedule(static)
      for (std::size_t k = 0; k < nbins; ++k) acc[k] += X[k] * std::conj(H[k]);
    }
    if (!any) continue;
    std::copy(acc.begin(), acc.end(), ws.spectrum());
    fft::inverse_crop(plans, ws, tmp);
    for (std::size_t x = 0; x < tmp.size(); ++x) out[x] += tmp[x];
  }
}

double OperatorSet::row_sum_max() const {
  double z = 0.0;
  std::vector<double> ones(grid_.size(), 1.0), rs(grid_.size());
  for (const auto& op : ops_) {
    if (op->realization() == Realization::Direct) {
      const auto& d = static_cast<const DirectOperator&>(*op);
      for (std::size_t y = 0; y < grid_.size(); ++y) z = std::max(z, d.row_sum(y));
    } else {
      op->forward(ones, rs);
      for (double v : rs) z = std::max(z, v);
    }
  }
  return z;
}

double row_sum_max(const OperatorSet& ops) {
  const double z = ops.row_sum_max();
  if (!(z > 0.0) || !std::isfinite(z))
    throw DegenerateOperator("operators have no positive row sum");
  return z;
}

namespace {

bool fourier_eligible(const SourceDetectorPair& p) {
  return !p.is_transmission && p.source_horizontal() &&
         p.theta_s.dot(p.theta_d) < -kAlignTol;
}

}  // namespace

OperatorSet build_operator_set(const ImageGrid& grid, const std::vector<SourceDetectorPair>& pairs,
                               OperatorChoice choice, std::size_t extra_rows, bool common_padding) {
  std::vector<bool> use_fourier(pairs.size(), false);
  std::size_t max_n2 = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (choice == OperatorChoice::Direct || p.is_transmission) continue;
    if (choice == OperatorChoice::Fourier) {
      padded_dims(p, grid);  // surfaces AlignmentError / DegenerateAngleError
      if (!fourier_eligible(p))
        throw DegenerateAngleError("Fourier operator needs a forward-scatter pair (θs·θd < 0)");
      use_fourier[i] = true;
    } else {
      use_fourier[i] = fourier_eligible(p);
    }
    if (use_fourier[i]) max_n2 = std::max(max_n2, padded_dims(p, grid).second);
  }
  std::vector<std::unique_ptr<BrtOperator>> ops;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (use_fourier[i]) {
      std::size_t extra = extra_rows;
      if (common_padding) extra += max_n2 - padded_dims(pairs[i], grid).second;
      ops.push_back(std::make_unique<FourierOperator>(grid, pairs[i], extra));
    } else {
      ops.push_back(std::make_unique<DirectOperator>(grid, pairs[i]));
    }
  }
  return OperatorSet(grid, std::move(ops));
}

}  // namespace brt
