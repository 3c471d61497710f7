#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedopt/ntriples.hpp"
#include "fedopt/query_model.hpp"

namespace fedopt {

class UnknownEndpoint : public std::runtime_error {
 public:
  explicit UnknownEndpoint(const std::string &iri_);
  std::string iri;
};

class UnsupportedFilter : public std::runtime_error {
 public:
  explicit UnsupportedFilter(const std::string &body_);
  std::string body;
};

// Ground triples of one endpoint with exact-term indexes per position.
// Construction dedupes; lookups never see duplicates.
class TripleStore {
 public:
  TripleStore() = default;
  explicit TripleStore(std::vector<NTriple> triples);

  const std::vector<NTriple> &triples() const { return triples_; }
  size_t size() const { return triples_.size(); }
  // Indices of triples whose term at `position` equals `term` exactly.
  const std::vector<int> &with_term(TriplePosition position, const std::string &term) const;

 private:
  std::vector<NTriple> triples_;
  std::array<std::map<std::string, std::vector<int>>, 3> index_;
};

struct Federation {
  // Keyed by bare endpoint IRI (no angle brackets).
  std::map<std::string, TripleStore> stores;
};

// Manifest: JSON object mapping endpoint IRIs to N-Triples paths resolved
// relative to the manifest's directory. Errors name the offending path;
// duplicate endpoint keys are rejected.
Federation load_federation(const std::string &manifest_path);

// Variable name (no sigil) to canonical ground term.
using Solution = std::map<std::string, std::string>;

struct ServiceCalls {
  int original_index = 0;
  int calls = 0;
};

struct SimulationResult {
  std::vector<Solution> solutions;  // multiset; order deterministic
  std::vector<ServiceCalls> per_service_calls;  // execution order
  int total_calls = 0;
  std::vector<int> intermediate_sizes;  // |solutions| after each service
  double wall_seconds = 0.0;
};

// Bind-join evaluation of the query in its given order. Constant endpoints
// cost one call per distinct projection of the current solutions onto the
// service's bound variables (minimum one); a Variable endpoint costs one
// call per distinct IRI bound to it, and an IRI without a store yields no
// matches rather than an error. OPTIONAL segments left-outer-join.
// Throws UnknownEndpoint for constant endpoints absent from the
// federation, UnsupportedFilter for filter forms the simulator cannot
// evaluate, and std::invalid_argument for sub-SELECT bodies or prefixed
// names with no matching PREFIX declaration.
SimulationResult evaluate_sequence(const FederatedQuery &q, const Federation &fed);

struct SimulatedOptimal {
  std::vector<std::vector<int>> orders;  // per segment, original_index values
  SimulationResult result;
};

// Evaluates every valid ordering and returns one minimizing total calls,
// breaking ties by fewer summed intermediate sizes, then by the order
// closest to the input order. Segments are minimized independently: a
// segment's solution multiset does not depend on its internal order, so
// later segments see the same input either way.
SimulatedOptimal simulated_optimal(const FederatedQuery &q, const Federation &fed,
                                   int exhaustive_cap = 9);

}  // namespace fedopt
