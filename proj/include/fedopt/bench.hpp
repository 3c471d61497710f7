#pragma once

#include <optional>
#include <vector>

#include "fedopt/cost_model.hpp"
#include "fedopt/planner.hpp"
#include "fedopt/query_model.hpp"
#include "fedopt/synth.hpp"

namespace fedopt {

struct TimingRow {
  int service_count = 0;
  double exhaustive_seconds = 0.0;
  double greedy_seconds = 0.0;
};

/// Dependency-free single-segment query: `service_count` constant-endpoint
/// services of two triples each, chained on a shared variable, so every
/// permutation is valid and exhaustive planning sweeps the full factorial.
FederatedQuery chain_query(int service_count);

/// Wall-clock per plan for chain queries of each size, repeating short runs
/// until enough time accumulates for a stable average. The exhaustive cap
/// is lifted to `max_services` internally; the caller's config is not the
/// safety valve here, the size range is.
std::vector<TimingRow> run_timing(int min_services, int max_services, const CostConfig &config);

/// Average seconds for one greedy plan of a chain query of this size.
double time_greedy(int service_count, const CostConfig &config);

/// Ballpark full-sweep planning times measured once on a reference machine,
/// reported next to fresh measurements so the factorial trend can be eyeballed.
/// Hardware differs, so these are never asserted. Empty outside 5..12.
std::optional<double> reference_exhaustive_seconds(int service_count);

struct MethodAccuracy {
  CostMethod method = CostMethod::VC;
  int instances = 0;
  int optimal_hits = 0;       // planned order reaches the simulator's minimum calls
  int greedy_agreements = 0;  // greedy plan cost within 1e-9 of the exhaustive cost
};

struct AccuracyReport {
  int instances = 0;
  std::vector<MethodAccuracy> methods;  // VC, UVC, WUVC, JWUVC
};

/// Generates `config.instances` seeded instances, finds each one's true
/// minimum total call count with the simulator, and scores every cost
/// method's exhaustive plan against it; also counts how often the greedy
/// plan matches the exhaustive plan's cost.
AccuracyReport run_accuracy(const SynthConfig &config);

}  // namespace fedopt
