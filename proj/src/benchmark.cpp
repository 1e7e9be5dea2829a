#include "brt/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "brt/config.hpp"
#include "brt/errors.hpp"
#include "brt/forward_model.hpp"
#include "brt/kernels.hpp"
#include "brt/phantoms.hpp"
#include "brt/solver.hpp"
#include "brt/surrogates.hpp"

namespace brt {
namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double seconds(F&& f) {
  const auto t0 = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

ImageGrid bench_grid(std::size_t pixels) {
  const auto L1 = static_cast<std::size_t>(std::lround(std::sqrt(0.75 * static_cast<double>(pixels))));
  const std::size_t l1 = std::max<std::size_t>(2, L1);
  const std::size_t l2 = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(
                                                      static_cast<double>(pixels) / static_cast<double>(l1))));
  const double d = 1.5 / static_cast<double>(l1);
  return ImageGrid(l1, l2, d, d);
}

std::vector<SourceDetectorPair> bench_pairs(std::size_t count) {
  static const double deg[] = {18, -18, 15, -15, 12, -12, 9, -9};
  if (count < 1 || count > 8) throw ConfigError("benchmark pair count must be in [1, 8]");
  std::vector<SourceDetectorPair> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_pair(kPi, deg[i] * kPi / 180.0));
  return out;
}

double estimate_operator_bytes(const ImageGrid& grid, const std::vector<SourceDetectorPair>& pairs,
                               OperatorChoice choice) {
  double total = 0.0;
  for (const auto& p : pairs) {
    if (choice == OperatorChoice::Direct || p.is_transmission) {
      total += static_cast<double>(DirectOperator::estimate_nnz(grid, p)) * 12.0 +
               static_cast<double>(grid.size() + 1) * 8.0;
    } else {
      const auto [N1, N2] = padded_dims(p, grid);
      total += static_cast<double>(N2) * static_cast<double>(N1 / 2 + 1) * 16.0;
    }
  }
  return total;
}

double available_memory_bytes() {
  std::ifstream f("/proc/meminfo");
  std::string key;
  double kb = 0.0;
  std::string unit;
  while (f >> key >> kb >> unit)
    if (key == "MemAvailable:") return kb * 1024.0;
  return 0.0;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<BenchRow> run_benchmark(const BenchSettings& s, const std::function<void(const BenchRow&)>& on_row) {
  if (s.repetitions < 1) throw ConfigError("benchmark repetitions must be positive");
  if (s.workers > 0) set_workers(s.workers);
  double budget = s.memory_budget_bytes;
  if (!(budget > 0.0)) budget = 0.85 * available_memory_bytes();

  SolverConfig cfg;
  cfg.lambda_alpha = cfg.lambda_mu = s.lambda;

  std::vector<BenchRow> rows;
  for (std::size_t pixels : s.sizes) {
    const ImageGrid grid = bench_grid(pixels);
    const Image mu_u = shepp_logan(grid, 1.0);
    const Image alpha = scatter_map(mu_u, ScatterVariant::Positive);
    const Image& mu = mu_u;

    for (std::size_t count : s.pair_counts) {
      const auto pairs = bench_pairs(count);
      for (OperatorChoice choice : s.realizations) {
        BenchRow row;
        row.pixels = grid.size();
        row.L1 = grid.L1;
        row.L2 = grid.L2;
        row.pairs = count;
        row.realization = choice;
        row.workers = workers();
        if (budget > 0.0 && estimate_operator_bytes(grid, pairs, choice) > budget) {
          row.skipped = true;
          rows.push_back(row);
          if (on_row) on_row(row);
          continue;
        }

        std::vector<double> t_setup, t_fwd, t_adj, t_sc, t_at;
        OperatorSet ops;
        for (int r = 0; r < s.repetitions; ++r) {
          ops = OperatorSet();
          t_setup.push_back(seconds([&] { ops = build_operator_set(grid, pairs, choice); }));
        }

        MeasurementSet ms = make_measurement_set(grid, pairs, 350.0, 17.5);
        PairArrays proj;
        ops.forward_all(mu.values, proj);
        ms.counts = mean_counts_from_projections(alpha, proj, ms).g;
        const double Z0 = row_sum_max(ops);
        std::vector<double> back(grid.size());

        for (int r = 0; r < s.repetitions; ++r) {
          t_fwd.push_back(seconds([&] { ops.forward_all(mu.values, proj); }));
          t_adj.push_back(seconds([&] { ops.adjoint_sum(proj, back); }));
          // Bμ̂ is cached from the forward step, as it is inside the solver.
          t_sc.push_back(seconds([&] {
            const PairArrays gain = scatter_gain(proj, ms);
            (void)scatter_update(alpha, gain, ms, cfg);
          }));
          PairArrays next;
          t_at.push_back(seconds([&] {
            const Image m = attenuation_update(alpha, mu, proj, ms, ops, Z0, cfg);
            ops.forward_all(m.values, next);
          }));
        }
        row.setup_s = median(t_setup);
        row.forward_s = median(t_fwd);
        row.adjoint_s = median(t_adj);
        row.scatter_update_s = median(t_sc);
        row.attenuation_update_s = median(t_at);
        rows.push_back(row);
        if (on_row) on_row(row);
      }
    }
  }
  return rows;
}

std::string bench_csv_header() {
  return "pixels,L1,L2,pairs,op,workers,setup_s,forward_s,adjoint_s,scatter_update_s,attenuation_update_s";
}

std::string bench_csv_row(const BenchRow& r) {
  std::ostringstream o;
  o << r.pixels << ',' << r.L1 << ',' << r.L2 << ',' << r.pairs << ',' << to_string(r.realization) << ','
    << r.workers;
  if (r.skipped) {
    o << ",NA,NA,NA,NA,NA";
  } else {
    char buf[256];
    std::snprintf(buf, sizeof buf, ",%.6e,%.6e,%.6e,%.6e,%.6e", r.setup_s, r.forward_s, r.adjoint_s,
                  r.scatter_update_s, r.attenuation_update_s);
    o << buf;
  }
  return o.str();
}

}  // namespace brt
