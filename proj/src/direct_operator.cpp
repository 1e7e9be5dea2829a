#include <algorithm>
#include <string>

#include <omp.h>

#include "brt/errors.hpp"
#include "brt/operators.hpp"
#include "brt/ray_trace.hpp"

namespace brt {
namespace {

using Entry = std::pair<std::uint32_t, double>;

// Weights of row y: both half-rays from the pixel center. The two rays share
// at least the vertex cell; `slot` (one entry per pixel, all −1 between
// calls) merges repeated cells in O(row length).
void trace_row(const ImageGrid& grid, const SourceDetectorPair& pair, std::size_t y,
               std::vector<Entry>& buf, std::vector<std::int32_t>& slot) {
  buf.clear();
  const double fx = static_cast<double>(y % grid.L1) + 0.5;
  const double fy = static_cast<double>(y / grid.L1) + 0.5;
  auto emit = [&](std::size_t cell, double len) {
    std::int32_t& s = slot[cell];
    if (s >= 0) {
      buf[static_cast<std::size_t>(s)].second += len;
    } else {
      s = static_cast<std::int32_t>(buf.size());
      buf.emplace_back(static_cast<std::uint32_t>(cell), len);
    }
  };
  trace_ray(grid, fx, fy, pair.theta_s, emit);
  trace_ray(grid, fx, fy, pair.theta_d, emit);
  for (const auto& e : buf) slot[e.first] = -1;
}

void check_size(std::span<const double> in, std::span<double> out, std::size_t n) {
  if (in.size() != n || out.size() != n)
    throw GridMismatch("operator input/output size does not match grid (" + std::to_string(n) + ")");
}

}  // namespace

DirectOperator::DirectOperator(const ImageGrid& grid, const SourceDetectorPair& pair, Exec exec)
    : BrtOperator(grid, pair) {
  const std::size_t n = grid.size();
  if (n > 0x7fffffffu) throw InvalidGrid("grid too large for 32-bit column indices");
  row_ptr_.assign(n + 1, 0);
  const bool par = exec == Exec::Parallel;

#pragma omp parallel if (par)
  {
    std::vector<Entry> buf;
    std::vector<std::int32_t> slot(n, -1);
#pragma omp for schedule(dynamic, 256)
    for (std::size_t y = 0; y < n; ++y) {
      trace_row(grid_, pair_, y, buf, slot);
      row_ptr_[y + 1] = buf.size();
    }
  }
  for (std::size_t y = 0; y < n; ++y) row_ptr_[y + 1] += row_ptr_[y];
  cols_.resize(row_ptr_[n]);
  vals_.resize(row_ptr_[n]);

#pragma omp parallel if (par)
  {
    std::vector<Entry> buf;
    std::vector<std::int32_t> slot(n, -1);
#pragma omp for schedule(dynamic, 256)
    for (std::size_t y = 0; y < n; ++y) {
      trace_row(grid_, pair_, y, buf, slot);
      std::size_t k = row_ptr_[y];
      for (const auto& [c, h] : buf) {
        cols_[k] = c;
        vals_[k] = h;
        ++k;
      }
    }
  }
}

std::size_t DirectOperator::memory_bytes() const {
  return row_ptr_.size() * sizeof(std::uint64_t) + cols_.size() * sizeof(std::uint32_t) +
         vals_.size() * sizeof(double);
}

void DirectOperator::forward(std::span<const double> mu, std::span<double> out) const {
  forward(mu, out, Exec::Parallel);
}

void DirectOperator::adjoint(std::span<const double> p, std::span<double> out) const {
  adjoint(p, out, Exec::Parallel);
}

void DirectOperator::forward(std::span<const double> mu, std::span<double> out, Exec exec) const {
  const std::size_t n = grid_.size();
  check_size(mu, out, n);
  const auto* rp = row_ptr_.data();
  const auto* cc = cols_.data();
  const auto* vv = vals_.data();
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::size_t y = 0; y < n; ++y) {
    double s = 0.0;
    for (std::uint64_t k = rp[y]; k < rp[y + 1]; ++k) s += vv[k] * mu[cc[k]];
    out[y] = s;
  }
}

void DirectOperator::adjoint(std::span<const double> p, std::span<double> out, Exec exec) const {
  const std::size_t n = grid_.size();
  check_size(p, out, n);
  const auto* rp = row_ptr_.data();
  const auto* cc = cols_.data();
  const auto* vv = vals_.data();

  if (exec == Exec::Serial) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t y = 0; y < n; ++y) {
      const double py = p[y];
      if (py == 0.0) continue;
      for (std::uint64_t k = rp[y]; k < rp[y + 1]; ++k) out[cc[k]] += vv[k] * py;
    }
    return;
  }

  // Rows are split into fixed chunks, each scattered into its own buffer;
  // buffers are then summed in chunk order.
  const std::size_t K = std::min<std::size_t>(kReductionChunks, n);
  std::vector<double> part(K * n, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t c = 0; c < K; ++c) {
    double* buf = part.data() + c * n;
    const std::size_t y0 = c * n / K, y1 = (c + 1) * n / K;
    for (std::size_t y = y0; y < y1; ++y) {
      const double py = p[y];
      if (py == 0.0) continue;
      for (std::uint64_t k = rp[y]; k < rp[y + 1]; ++k) buf[cc[k]] += vv[k] * py;
    }
  }
#pragma omp parallel for schedule(static)
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (std::size_t c = 0; c < K; ++c) s += part[c * n + x];
    out[x] = s;
  }
}

double DirectOperator::row_sum(std::size_t y) const {
  double s = 0.0;
  for (std::uint64_t k = row_ptr_[y]; k < row_ptr_[y + 1]; ++k) s += vals_[k];
  return s;
}

std::vector<std::pair<std::size_t, double>> DirectOperator::row(std::size_t y) const {
  std::vector<std::pair<std::size_t, double>> r;
  for (std::uint64_t k = row_ptr_[y]; k < row_ptr_[y + 1]; ++k) r.emplace_back(cols_[k], vals_[k]);
  std::sort(r.begin(), r.end());
  return r;
}

std::uint64_t DirectOperator::estimate_nnz(const ImageGrid& grid, const SourceDetectorPair& pair) {
  const std::size_t n = grid.size();
  const std::size_t stride = std::max<std::size_t>(1, n / 4096);
  std::vector<Entry> buf;
  std::vector<std::int32_t> slot(n, -1);
  std::uint64_t sampled = 0, rows = 0;
  // Odd offset so the sample does not line up with a single column.
  for (std::size_t y = stride / 2; y < n; y += stride + (stride > 1 ? 1 : 0)) {
    trace_row(grid, pair, y, buf, slot);
    sampled += buf.size();
    ++rows;
  }
  return rows == 0 ? 0 : sampled * n / rows;
}

std::unique_ptr<DirectOperator> build_direct(const ImageGrid& grid, const SourceDetectorPair& pair) {
  return std::make_unique<DirectOperator>(grid, pair);
}

void set_workers(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int workers() { return omp_get_max_threads(); }

}  // namespace brt
