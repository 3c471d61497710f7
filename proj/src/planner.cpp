#include "fedopt/planner.hpp"

#include <algorithm>
#include <bitset>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace fedopt {

namespace {

constexpr size_t kMaxSegmentNames = 128;
using NameMask = std::bitset<kMaxSegmentNames>;

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

class NameInterner {
 public:
  int id(const std::string &name) {
    auto [it, inserted] = ids_.emplace(name, static_cast<int>(ids_.size()));
    if (inserted && ids_.size() > kMaxSegmentNames)
      throw std::invalid_argument("segment uses more than 128 distinct variable names");
    return it->second;
  }
  const int *lookup(const std::string &name) const {
    auto it = ids_.find(name);
    return it == ids_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, int> ids_;
};

// The binding-set machinery compiled to bitmasks so enumeration stays cheap
// deep inside the factorial search.
struct CompiledService {
  int original_index = 0;
  NameMask exposure;
  int requirement_id = -1;  // endpoint variable, -1 for constant endpoints
  double base = 0.0;
  std::vector<std::pair<int, double>> unbound_terms;
  int tie_break = 0;
};

struct CompiledSegment {
  std::vector<CompiledService> services;
  NameMask initial;
  std::vector<double> weights;
};

CompiledSegment compile_segment(const QuerySegment &segment, const BindingSet &initial,
                                const CostConfig *config) {
  NameInterner names;
  CompiledSegment out;
  for (const ServicePattern &s : segment.services) {
    CompiledService c;
    c.original_index = s.original_index;
    for (const std::string &name : exposed_variables(s)) c.exposure.set(names.id(name));
    if (s.endpoint.kind == TermKind::Variable)
      c.requirement_id = names.id(s.endpoint.variable_name());
    if (config) {
      CostTerms terms = cost_terms(s, *config);
      c.base = terms.base;
      for (const auto &[name, weight] : terms.unbound_contributions)
        c.unbound_terms.emplace_back(names.id(name), weight);
      c.tie_break = tie_break_score(s);
    }
    out.services.push_back(std::move(c));
  }
  for (const std::string &name : initial)
    if (const int *found = names.lookup(name)) out.initial.set(*found);
  out.weights = sequence_weights(static_cast<int>(segment.services.size()));
  return out;
}

double service_cost(const CompiledService &c, const NameMask &bound) {
  double cost = c.base;
  for (const auto &[id, weight] : c.unbound_terms)
    if (!bound.test(id)) cost += weight;
  return cost;
}

struct EnumerationResult {
  bool found = false;
  std::vector<int> best_slots;
  double best_cost = 0.0;
  std::vector<PermutationRow> table;
};

class Enumerator {
 public:
  Enumerator(const CompiledSegment &seg, bool collect_table)
      : seg_(seg), collect_table_(collect_table), n_(seg.services.size()),
        current_(n_, 0), used_(n_, 0) {}

  EnumerationResult run() {
    dfs(0, seg_.initial, 0.0);
    return std::move(result_);
  }

 private:
  void dfs(size_t depth, NameMask bound, double acc) {
    if (depth == n_) {
      leaf(acc);
      return;
    }
    for (size_t i = 0; i < n_; ++i) {
      if (used_[i]) continue;
      const CompiledService &c = seg_.services[i];
      if (c.requirement_id >= 0 && !bound.test(c.requirement_id)) continue;
      used_[i] = 1;
      current_[depth] = static_cast<int>(i);
      dfs(depth + 1, bound | c.exposure, acc + seg_.weights[depth] * service_cost(c, bound));
      used_[i] = 0;
    }
  }

  void leaf(double cost) {
    if (collect_table_) {
      PermutationRow row;
      row.cost = cost;
      row.order.reserve(n_);
      for (int slot : current_) row.order.push_back(seg_.services[slot].original_index);
      result_.table.push_back(std::move(row));
    }
    if (better_than_best(cost)) {
      result_.best_slots = current_;
      result_.best_cost = cost;
      result_.found = true;
    }
  }

  // Lower cost wins; within the tie window prefer the greater tie-break
  // sequence position by position, then the smaller original_index
  // sequence.
  bool better_than_best(double cost) const {
    if (!result_.found) return true;
    if (cost < result_.best_cost - kTieEps) return true;
    if (cost > result_.best_cost + kTieEps) return false;
    for (size_t k = 0; k < n_; ++k) {
      const int a = seg_.services[current_[k]].tie_break;
      const int b = seg_.services[result_.best_slots[k]].tie_break;
      if (a != b) return a > b;
    }
    for (size_t k = 0; k < n_; ++k) {
      const int a = seg_.services[current_[k]].original_index;
      const int b = seg_.services[result_.best_slots[k]].original_index;
      if (a != b) return a < b;
    }
    return false;
  }

  const CompiledSegment &seg_;
  bool collect_table_;
  size_t n_;
  std::vector<int> current_;
  std::vector<char> used_;
  EnumerationResult result_;
};

// Names the first endpoint variable that nothing can bind, or reports a
// dependency cycle when each variable has a binder but no order works.
std::string describe_unsatisfiable(const QuerySegment &segment, const BindingSet &initial) {
  for (const ServicePattern &s : segment.services) {
    if (s.endpoint.kind != TermKind::Variable) continue;
    const std::string name = s.endpoint.variable_name();
    if (initial.count(name)) continue;
    bool bindable = false;
    for (const ServicePattern &other : segment.services) {
      if (&other == &s) continue;
      if (exposed_variables(other).count(name)) {
        bindable = true;
        break;
      }
    }
    if (!bindable)
      return "no service binds variable '" + name + "' required by SERVICE " +
             s.endpoint.lexical;
  }
  return "endpoint-variable dependencies are circular; no valid ordering exists";
}

const ServicePattern &service_by_original_index(const QuerySegment &segment, int index) {
  for (const ServicePattern &s : segment.services)
    if (s.original_index == index) return s;
  throw std::invalid_argument("order names original index " + std::to_string(index) +
                              " which is not in the segment");
}

void merge_exposures(BindingSet &bound, const ServicePattern &s) {
  const BindingSet exposed = exposed_variables(s);
  bound.insert(exposed.begin(), exposed.end());
}

std::vector<std::string> describe_constraints(const FederatedQuery &q) {
  std::vector<std::string> constraints;
  bool segmented = q.segments.size() > 1;
  for (const QuerySegment &segment : q.segments)
    if (segment.inside_optional) segmented = true;
  if (segmented) constraints.push_back("optional-segmentation");
  for (const QuerySegment &segment : q.segments)
    for (const ServicePattern &s : segment.services)
      if (s.endpoint.kind == TermKind::Variable) {
        constraints.push_back("endpoint-variable-dependency");
        return constraints;
      }
  return constraints;
}

std::vector<ServiceCostRow> segment_cost_rows(const QuerySegment &segment,
                                              const BindingSet &initial,
                                              const CostConfig &config) {
  std::vector<ServiceCostRow> rows;
  rows.reserve(segment.services.size());
  for (const ServicePattern &s : segment.services)
    rows.push_back({s.original_index, unrestrictiveness(s, initial, config),
                    tie_break_score(s)});
  return rows;
}

}  // namespace

ExhaustiveCapExceeded::ExhaustiveCapExceeded(int service_count_, int cap_)
    : std::runtime_error("segment with " + std::to_string(service_count_) +
                         " services exceeds the exhaustive cap of " + std::to_string(cap_) +
                         "; use the greedy strategy"),
      service_count(service_count_),
      cap(cap_) {}

std::string to_string(PlanStrategy strategy) {
  switch (strategy) {
    case PlanStrategy::Exhaustive: return "exhaustive";
    case PlanStrategy::Greedy: return "greedy";
    case PlanStrategy::Sort: return "sort";
  }
  return "exhaustive";
}

StrategyChoice parse_strategy_choice(std::string_view name) {
  const std::string key = lower(name);
  if (key == "exhaustive") return StrategyChoice::Exhaustive;
  if (key == "greedy") return StrategyChoice::Greedy;
  if (key == "auto") return StrategyChoice::Auto;
  throw std::invalid_argument("unknown strategy '" + std::string(name) +
                              "' (expected exhaustive, greedy or auto)");
}

std::vector<std::vector<int>> PlanReport::chosen_orders() const {
  std::vector<std::vector<int>> orders;
  orders.reserve(segments.size());
  for (const SegmentPlan &segment : segments) orders.push_back(segment.chosen_order);
  return orders;
}

std::vector<double> sequence_weights(int n) {
  if (n < 1) throw std::invalid_argument("sequence length must be at least 1");
  std::vector<double> weights(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    weights[static_cast<size_t>(i)] = static_cast<double>(n - i) / n;
  return weights;
}

double sequence_cost(std::span<const ServicePattern> services, const CostConfig &config,
                     const BindingSet &initial) {
  if (services.empty()) throw std::invalid_argument("sequence_cost needs at least one service");
  config.validate();
  const std::vector<double> weights = sequence_weights(static_cast<int>(services.size()));
  BindingSet bound = initial;
  double total = 0.0;
  for (size_t i = 0; i < services.size(); ++i) {
    const ServicePattern &s = services[i];
    if (s.endpoint.kind == TermKind::Variable && !bound.count(s.endpoint.variable_name()))
      throw DependencyUnsatisfiable("SERVICE " + s.endpoint.lexical +
                                    " is not preceded by a binder of '" +
                                    s.endpoint.variable_name() + "'");
    total += weights[i] * unrestrictiveness(s, bound, config);
    merge_exposures(bound, s);
  }
  return total;
}

double sequence_cost(const QuerySegment &segment, std::span<const int> order,
                     const CostConfig &config, const BindingSet &initial) {
  if (order.size() != segment.services.size())
    throw std::invalid_argument("order length does not match the segment");
  std::vector<ServicePattern> services;
  services.reserve(order.size());
  std::set<int> seen;
  for (int index : order) {
    if (!seen.insert(index).second)
      throw std::invalid_argument("order repeats original index " + std::to_string(index));
    services.push_back(service_by_original_index(segment, index));
  }
  return sequence_cost(services, config, initial);
}

std::vector<std::vector<int>> valid_orderings(const QuerySegment &segment,
                                              const BindingSet &initial) {
  const CompiledSegment compiled = compile_segment(segment, initial, nullptr);
  const size_t n = compiled.services.size();
  std::vector<std::vector<int>> result;
  std::vector<int> current(n, 0);
  std::vector<char> used(n, 0);

  auto dfs = [&](auto &&self, size_t depth, NameMask bound) -> void {
    if (depth == n) {
      std::vector<int> order;
      order.reserve(n);
      for (int slot : current) order.push_back(compiled.services[slot].original_index);
      result.push_back(std::move(order));
      return;
    }
    for (size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const CompiledService &c = compiled.services[i];
      if (c.requirement_id >= 0 && !bound.test(c.requirement_id)) continue;
      used[i] = 1;
      current[depth] = static_cast<int>(i);
      self(self, depth + 1, bound | c.exposure);
      used[i] = 0;
    }
  };
  dfs(dfs, 0, compiled.initial);

  if (result.empty()) throw DependencyUnsatisfiable(describe_unsatisfiable(segment, initial));
  return result;
}

std::vector<QuerySegment> segment_by_optional(const FederatedQuery &q) {
  return q.segments;
}

FederatedQuery reorder_query(const FederatedQuery &q,
                             const std::vector<std::vector<int>> &segment_orders) {
  if (segment_orders.size() != q.segments.size())
    throw std::invalid_argument("segment order count does not match the query");
  FederatedQuery out;
  out.prologue = q.prologue;
  out.projection = q.projection;
  out.tail = q.tail;
  for (size_t k = 0; k < q.segments.size(); ++k) {
    const QuerySegment &segment = q.segments[k];
    const std::vector<int> &order = segment_orders[k];
    if (order.size() != segment.services.size())
      throw std::invalid_argument("order length does not match segment " + std::to_string(k));
    QuerySegment rebuilt;
    rebuilt.inside_optional = segment.inside_optional;
    std::set<int> seen;
    for (int index : order) {
      if (!seen.insert(index).second)
        throw std::invalid_argument("order repeats original index " + std::to_string(index));
      rebuilt.services.push_back(service_by_original_index(segment, index));
    }
    out.segments.push_back(std::move(rebuilt));
  }
  return out;
}

PlanResult exhaustive_plan(const FederatedQuery &q, const CostConfig &config,
                           bool collect_permutation_table) {
  config.validate();
  PlanResult result;
  result.report.method = config.method;
  result.report.constraints_applied = describe_constraints(q);

  bool enumerated_anywhere = false;
  BindingSet carried;
  std::vector<std::vector<int>> orders;
  for (const QuerySegment &segment : q.segments) {
    const int n = static_cast<int>(segment.services.size());
    if (n > config.exhaustive_cap) throw ExhaustiveCapExceeded(n, config.exhaustive_cap);

    SegmentPlan plan;
    plan.inside_optional = segment.inside_optional;
    plan.service_costs = segment_cost_rows(segment, carried, config);

    bool has_variable_endpoint = false;
    for (const ServicePattern &s : segment.services)
      if (s.endpoint.kind == TermKind::Variable) has_variable_endpoint = true;

    if (config.method == CostMethod::VC && !has_variable_endpoint) {
      // VC ignores bindings, so with decreasing position weights an
      // ascending sort is already the argmin; no enumeration needed.
      std::vector<int> slots(segment.services.size());
      std::iota(slots.begin(), slots.end(), 0);
      std::sort(slots.begin(), slots.end(), [&](int a, int b) {
        const ServiceCostRow &ra = plan.service_costs[static_cast<size_t>(a)];
        const ServiceCostRow &rb = plan.service_costs[static_cast<size_t>(b)];
        if (ra.cost != rb.cost) return ra.cost < rb.cost;
        if (ra.tie_break != rb.tie_break) return ra.tie_break > rb.tie_break;
        return ra.original_index < rb.original_index;
      });
      for (int slot : slots)
        plan.chosen_order.push_back(segment.services[static_cast<size_t>(slot)].original_index);
    } else {
      enumerated_anywhere = true;
      const CompiledSegment compiled = compile_segment(segment, carried, &config);
      EnumerationResult enumerated = Enumerator(compiled, collect_permutation_table).run();
      if (!enumerated.found)
        throw DependencyUnsatisfiable(describe_unsatisfiable(segment, carried));
      for (int slot : enumerated.best_slots)
        plan.chosen_order.push_back(compiled.services[static_cast<size_t>(slot)].original_index);
      if (collect_permutation_table) plan.permutation_table = std::move(enumerated.table);
    }

    plan.chosen_cost = sequence_cost(segment, plan.chosen_order, config, carried);
    result.report.chosen_cost += plan.chosen_cost;
    orders.push_back(plan.chosen_order);
    result.report.segments.push_back(std::move(plan));
    for (const ServicePattern &s : segment.services) merge_exposures(carried, s);
  }

  result.report.strategy = (config.method == CostMethod::VC && !enumerated_anywhere)
                               ? PlanStrategy::Sort
                               : PlanStrategy::Exhaustive;
  result.query = reorder_query(q, orders);
  return result;
}

PlanResult greedy_plan(const FederatedQuery &q, const CostConfig &config) {
  config.validate();
  PlanResult result;
  result.report.method = config.method;
  result.report.strategy = PlanStrategy::Greedy;
  result.report.constraints_applied = describe_constraints(q);

  BindingSet carried;
  std::vector<std::vector<int>> orders;
  for (const QuerySegment &segment : q.segments) {
    SegmentPlan plan;
    plan.inside_optional = segment.inside_optional;
    plan.service_costs = segment_cost_rows(segment, carried, config);

    const size_t n = segment.services.size();
    BindingSet bound = carried;
    std::vector<char> used(n, 0);
    for (size_t step = 0; step < n; ++step) {
      int pick = -1;
      double pick_cost = 0.0;
      for (size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        const ServicePattern &s = segment.services[i];
        if (s.endpoint.kind == TermKind::Variable &&
            !bound.count(s.endpoint.variable_name()))
          continue;
        const double cost = unrestrictiveness(s, bound, config);
        if (pick < 0 || cost < pick_cost - kTieEps) {
          pick = static_cast<int>(i);
          pick_cost = cost;
          continue;
        }
        if (cost <= pick_cost + kTieEps) {
          const ServicePattern &chosen = segment.services[static_cast<size_t>(pick)];
          const int tb_i = tie_break_score(s);
          const int tb_p = tie_break_score(chosen);
          if (tb_i > tb_p || (tb_i == tb_p && s.original_index < chosen.original_index)) {
            pick = static_cast<int>(i);
            pick_cost = std::min(pick_cost, cost);
          }
        }
      }
      if (pick < 0) throw DependencyUnsatisfiable(describe_unsatisfiable(segment, carried));
      const ServicePattern &s = segment.services[static_cast<size_t>(pick)];
      used[static_cast<size_t>(pick)] = 1;
      plan.chosen_order.push_back(s.original_index);
      merge_exposures(bound, s);
    }

    plan.chosen_cost = sequence_cost(segment, plan.chosen_order, config, carried);
    result.report.chosen_cost += plan.chosen_cost;
    orders.push_back(plan.chosen_order);
    result.report.segments.push_back(std::move(plan));
    for (const ServicePattern &s : segment.services) merge_exposures(carried, s);
  }

  result.query = reorder_query(q, orders);
  return result;
}

PlanResult plan_query(const FederatedQuery &q, const CostConfig &config,
                      StrategyChoice choice) {
  switch (choice) {
    case StrategyChoice::Exhaustive:
      return exhaustive_plan(q, config, false);
    case StrategyChoice::Greedy:
      return greedy_plan(q, config);
    case StrategyChoice::Auto:
      break;
  }
  for (const QuerySegment &segment : q.segments)
    if (static_cast<int>(segment.services.size()) > config.exhaustive_cap)
      return greedy_plan(q, config);
  return exhaustive_plan(q, config, false);
}

}  // namespace fedopt
