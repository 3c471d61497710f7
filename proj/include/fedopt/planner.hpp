#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fedopt/cost_model.hpp"
#include "fedopt/query_model.hpp"

namespace fedopt {

// No ordering can satisfy every endpoint-variable dependency.
class DependencyUnsatisfiable : public std::runtime_error {
 public:
  explicit DependencyUnsatisfiable(const std::string &message)
      : std::runtime_error(message) {}
};

// A segment has more services than the exhaustive search cap allows.
class ExhaustiveCapExceeded : public std::runtime_error {
 public:
  ExhaustiveCapExceeded(int service_count, int cap);
  int service_count;
  int cap;
};

enum class PlanStrategy { Exhaustive, Greedy, Sort };
enum class StrategyChoice { Exhaustive, Greedy, Auto };

std::string to_string(PlanStrategy strategy);
// Accepts "exhaustive", "greedy", "auto" case-insensitively; throws
// std::invalid_argument otherwise.
StrategyChoice parse_strategy_choice(std::string_view name);

// Sequence costs closer than this are ties and fall to the tie-break rules.
inline constexpr double kTieEps = 1e-9;

struct ServiceCostRow {
  int original_index = 0;
  double cost = 0.0;  // unrestrictiveness at the segment's initial bindings
  int tie_break = 0;
};

struct PermutationRow {
  std::vector<int> order;  // original_index sequence
  double cost = 0.0;
};

struct SegmentPlan {
  bool inside_optional = false;
  std::vector<int> chosen_order;  // original_index sequence
  double chosen_cost = 0.0;
  std::vector<ServiceCostRow> service_costs;  // in source order
  // Every valid permutation with its cost; present only when the segment
  // was planned by enumeration and table collection was requested.
  std::optional<std::vector<PermutationRow>> permutation_table;
};

struct PlanReport {
  CostMethod method = CostMethod::JWUVC;
  PlanStrategy strategy = PlanStrategy::Exhaustive;
  double chosen_cost = 0.0;  // sum over segments
  std::vector<SegmentPlan> segments;
  std::vector<std::string> constraints_applied;

  std::vector<std::vector<int>> chosen_orders() const;
};

struct PlanResult {
  FederatedQuery query;
  PlanReport report;
};

// Position weights (n-i+1)/n for i = 1..n: strictly decreasing from 1 to
// 1/n. Throws std::invalid_argument for n < 1.
std::vector<double> sequence_weights(int n);

// Weighted sum of per-service scores with bindings accumulated left to
// right from `initial`. Throws DependencyUnsatisfiable when a service's
// endpoint variable is unbound at its position.
double sequence_cost(std::span<const ServicePattern> services, const CostConfig &config,
                     const BindingSet &initial = {});
// Same, with the order given as original_index values into the segment.
double sequence_cost(const QuerySegment &segment, std::span<const int> order,
                     const CostConfig &config, const BindingSet &initial = {});

// All permutations (as original_index sequences) in which every service
// with a Variable endpoint is preceded by a binder of that variable, given
// the variables in `initial` already bound. Thrown DependencyUnsatisfiable
// when no permutation qualifies.
std::vector<std::vector<int>> valid_orderings(const QuerySegment &segment,
                                              const BindingSet &initial = {});

// Segmentation is fixed at parse time; planning never moves a service
// across a segment boundary.
std::vector<QuerySegment> segment_by_optional(const FederatedQuery &q);

// Rebuilds the query with each segment's services in the given
// original_index order. Throws std::invalid_argument unless each order is
// a permutation of its segment's services.
FederatedQuery reorder_query(const FederatedQuery &q,
                             const std::vector<std::vector<int>> &segment_orders);

// Minimum-cost ordering per segment by enumeration of valid permutations
// (VC sorts instead when a segment has no endpoint-variable dependencies).
// Whole-ordering ties prefer placing high tie-break services earlier, then
// the order closest to the source order.
PlanResult exhaustive_plan(const FederatedQuery &q, const CostConfig &config,
                           bool collect_permutation_table = true);

// Repeatedly picks the eligible service with the lowest score under the
// bindings accumulated so far; ties prefer the higher tie-break score, then
// the lower original index.
PlanResult greedy_plan(const FederatedQuery &q, const CostConfig &config);

// Auto picks exhaustive_plan when every segment fits the cap, greedy_plan
// otherwise.
PlanResult plan_query(const FederatedQuery &q, const CostConfig &config,
                      StrategyChoice choice = StrategyChoice::Auto);

}  // namespace fedopt
