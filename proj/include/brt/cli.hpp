#pragma once

#include <string>
#include <vector>

#include "brt/config.hpp"
#include "brt/forward_model.hpp"
#include "brt/solver.hpp"

namespace brt {

struct PhantomPair {
  Image mu;     // scaled by max_mu
  Image alpha;  // from the unscaled attenuation
};

PhantomPair render_phantoms(const ExperimentConfig& cfg);

/// Counts for the configured geometry: the mean when noise_free, otherwise a
/// Poisson draw keyed by cfg.seed.
MeasurementSet simulate_measurements(const ExperimentConfig& cfg, const Image& mu, const Image& alpha,
                                     const OperatorSet& ops);

OperatorSet build_operators(const ExperimentConfig& cfg, const std::vector<SourceDetectorPair>& pairs);

/// Writes the J trace as CSV: iter,half,J,I_div,R_alpha,R_mu,wall_ms.
std::string trace_csv(const std::vector<TraceEntry>& trace);

/// Entry point of the `brt` tool; returns the process exit status.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace brt
