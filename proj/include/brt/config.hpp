#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "brt/geometry.hpp"
#include "brt/operators.hpp"
#include "brt/phantoms.hpp"
#include "brt/solver.hpp"

namespace brt {

struct PairSpec {
  double source_deg = 180.0;
  double detector_deg = 18.0;  // ignored for transmission entries
  bool transmission = false;
  bool operator==(const PairSpec&) const = default;
};

enum class PhantomKind { SheppLogan, Rectangle };

/// Everything one experiment needs. Defaults reproduce the desk-scale
/// single-source setup: 150×200 Shepp-Logan on a 1.5×2 support, one source at
/// 180° with detectors at ±18°, I0 = 350, β = 17.5, λ = 2e-3.
struct ExperimentConfig {
  // [grid]
  std::size_t L1 = 150, L2 = 200;
  double delta1 = 0.01, delta2 = 0.01;
  // [phantom]
  PhantomKind phantom = PhantomKind::SheppLogan;
  double max_mu = 1.0;
  ScatterVariant scatter = ScatterVariant::Positive;
  // [geometry]; transmission entries list the source angle only
  std::vector<PairSpec> pairs = {{180.0, 18.0, false}, {180.0, -18.0, false}};
  // [source]
  double I0 = 350.0;
  double beta = 17.5;
  // [simulation]
  std::uint64_t seed = 1;
  bool noise_free = false;
  // [solver]
  double lambda_alpha = 2e-3, lambda_mu = 2e-3;
  double delta = 0.01;
  int max_iters = 200;
  double stop_tol = 1e-7;
  double newton_tol = 1e-10;
  double mu_max = 10.0;
  double alpha0 = 0.5, mu0 = 0.0;
  OperatorChoice op = OperatorChoice::Auto;
  std::size_t extra_padding = 0;
  int workers = 0;
  // [benchmark]
  std::vector<std::size_t> bench_sizes = {30000, 120000, 480000};
  std::vector<std::size_t> bench_pair_counts = {1, 2, 4, 8};
  int bench_repetitions = 5;
  double bench_memory_mb = 0.0;  // 0: derive from available memory

  ImageGrid grid() const;
  std::vector<SourceDetectorPair> geometry() const;
  SolverConfig solver() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses INI text. Unknown sections or keys, malformed values and failed
/// validation throw ConfigError with the line number where it is known.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text: every key in a fixed order, numbers printed with %.17g.
std::string serialize_config(const ExperimentConfig& cfg);

std::string to_string(OperatorChoice c);
OperatorChoice parse_operator_choice(std::string_view s);

}  // namespace brt
