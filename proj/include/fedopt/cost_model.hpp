#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedopt/query_model.hpp"

namespace fedopt {

enum class CostMethod { VC, UVC, WUVC, JWUVC };

// Accepts method names case-insensitively; throws std::invalid_argument.
CostMethod parse_cost_method(std::string_view name);
std::string to_string(CostMethod method);

struct CostConfig {
  CostMethod method = CostMethod::JWUVC;
  double subject_weight = 1.0;
  double predicate_weight = 0.1;
  double object_weight = 0.8;
  double star_weight = 0.5;
  double chain_weight = 0.6;
  double unusual_weight = 1.0;
  int exhaustive_cap = 9;

  // Throws std::invalid_argument on negative weights or a cap below 1.
  void validate() const;
};

// JSON object with optional keys: method, w_s, w_p, w_o, j_star, j_chain,
// j_unusual, exhaustive_cap. Absent keys keep defaults; unknown keys are
// rejected.
CostConfig cost_config_from_json_text(const std::string &text);
CostConfig load_cost_config(const std::string &path);

struct JoinCounts {
  int star = 0;
  int chain = 0;
  int unusual = 0;
  bool operator==(const JoinCounts &) const = default;
};

// Counts one join per unordered pair of occurrences of a shared name in two
// different triples: any predicate position makes the pair unusual,
// same-position pairs are star joins, subject/object pairs are chain joins.
// Blank-node labels join like variables.
JoinCounts count_joins(const ServicePattern &s);

// Binding-dependent decomposition of a service's score:
// unrestrictiveness(s, B, cfg) = base + sum of contributions whose name is
// not in B. Contributions are ordered by name, deterministically.
struct CostTerms {
  double base = 0.0;
  std::vector<std::pair<std::string, double>> unbound_contributions;
};

CostTerms cost_terms(const ServicePattern &s, const CostConfig &config);

// The configured method's unrestrictiveness score given bound variables.
// Higher means more expected results; a fully bound pattern scores 0 under
// every method except VC.
double unrestrictiveness(const ServicePattern &s, const BindingSet &bound,
                         const CostConfig &config);

// Literal terms across the triples plus the number of FILTER bodies.
// Higher scores win cost ties (more selective, run earlier).
int tie_break_score(const ServicePattern &s);

}  // namespace fedopt
