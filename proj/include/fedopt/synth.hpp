#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fedopt/federation.hpp"
#include "fedopt/ntriples.hpp"
#include "fedopt/query_model.hpp"

namespace fedopt {

/// Deterministic random stream. The engine algorithm and every derivation
/// below are fully pinned by the language standard, so a given seed yields
/// the same sequence on every platform and toolchain (distribution classes,
/// whose algorithms are implementation-defined, are never used).
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, n). Requires n > 0.
  int below(int n);
  /// Uniform in [lo, hi], inclusive. Requires lo <= hi.
  int between(int lo, int hi);
  /// Uniform in [0, 1).
  double unit();
  bool chance(double probability);

 private:
  std::mt19937_64 engine_;
};

/// Knobs for generated workloads. Defaults match the committed benchmark
/// corpus; the CLI can override any of them.
struct SynthConfig {
  std::uint64_t seed = 1;
  int instances = 240;
  int min_services = 2;
  int max_services = 5;
  int min_noise_triples = 80;
  int max_noise_triples = 320;
  int max_triples_per_service = 3;
  double literal_object_probability = 0.25;
  double variable_endpoint_probability = 0.04;
  double predicate_variable_probability = 0.10;
  double variable_reuse_probability = 0.55;
  double blank_probability = 0.02;
  int entity_pool = 36;
  int predicate_pool = 6;
  int max_pattern_fanout = 10;

  /// Throws std::invalid_argument when a bound or probability is out of range.
  void validate() const;

  std::string to_json_text() const;
  static SynthConfig from_json_text(const std::string &text);
};

/// A generated query together with the store contents backing it, keyed by
/// bare endpoint IRI. Construction guarantees at least one solution.
struct SynthInstance {
  FederatedQuery query;
  std::map<std::string, std::vector<NTriple>> store_triples;

  Federation federation() const;
};

/// Standalone SERVICE pattern for cost-model property tests: one to
/// `max_triples` triples over a small shared variable pool (so joins occur),
/// occasional blank nodes and sub-SELECT projections, and at least one
/// constant per triple.
ServicePattern random_service_pattern(SynthRng &rng, int max_triples = 6);

/// Plannable query without data: `service_count` services with constant
/// endpoints, plus occasional variable endpoints whose binder is injected
/// into an earlier service so a valid ordering always exists. When
/// `allow_optional` holds, sometimes splits a tail of services into an
/// OPTIONAL segment.
FederatedQuery random_query(std::uint64_t seed, int service_count, bool allow_optional = false);

/// Query plus matching stores. Every service pattern is satisfiable by a
/// shared witness assignment, so evaluating the instance yields at least one
/// solution; noise and per-pattern fanout triples add further matches.
/// No OPTIONAL segments and no filters.
SynthInstance random_instance(std::uint64_t seed, const SynthConfig &config = {});

}  // namespace fedopt
