#include "fedopt/cost_model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace fedopt {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Blank nodes count like variables; their `_:` prefix keeps them from
// colliding with sigil-stripped variable names, and they never appear in
// any BindingSet.
std::optional<std::string> counting_name(const Term &term) {
  if (term.kind == TermKind::Variable) return term.variable_name();
  if (term.kind == TermKind::BlankNode) return term.lexical;
  return std::nullopt;
}

struct Occurrence {
  int triple;
  TriplePosition position;
};

std::map<std::string, std::vector<Occurrence>> occurrences(const ServicePattern &s) {
  std::map<std::string, std::vector<Occurrence>> out;
  for (int i = 0; i < static_cast<int>(s.triples.size()); ++i) {
    const TriplePattern &t = s.triples[i];
    const std::pair<const Term *, TriplePosition> slots[] = {
        {&t.subject, TriplePosition::Subject},
        {&t.predicate, TriplePosition::Predicate},
        {&t.object, TriplePosition::Object},
    };
    for (const auto &[term, position] : slots)
      if (auto name = counting_name(*term)) out[*name].push_back({i, position});
  }
  return out;
}

double position_weight(const std::vector<Occurrence> &occs, const CostConfig &config) {
  bool in_predicate = false;
  bool in_object = false;
  for (const auto &occ : occs) {
    if (occ.position == TriplePosition::Predicate) in_predicate = true;
    if (occ.position == TriplePosition::Object) in_object = true;
  }
  // Most restrictive occupied position wins: predicate over object over
  // subject. A projected variable absent from the triples counts as a
  // subject (the least restrictive position).
  if (in_predicate) return config.predicate_weight;
  if (in_object) return config.object_weight;
  return config.subject_weight;
}

}  // namespace

CostMethod parse_cost_method(std::string_view name) {
  const std::string key = lower(name);
  if (key == "vc") return CostMethod::VC;
  if (key == "uvc") return CostMethod::UVC;
  if (key == "wuvc") return CostMethod::WUVC;
  if (key == "jwuvc") return CostMethod::JWUVC;
  throw std::invalid_argument("unknown cost method '" + std::string(name) +
                              "' (expected vc, uvc, wuvc or jwuvc)");
}

std::string to_string(CostMethod method) {
  switch (method) {
    case CostMethod::VC: return "vc";
    case CostMethod::UVC: return "uvc";
    case CostMethod::WUVC: return "wuvc";
    case CostMethod::JWUVC: return "jwuvc";
  }
  return "jwuvc";
}

void CostConfig::validate() const {
  const double weights[] = {subject_weight, predicate_weight, object_weight,
                            star_weight,    chain_weight,     unusual_weight};
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("cost weights must be non-negative");
  if (exhaustive_cap < 1) throw std::invalid_argument("exhaustive_cap must be at least 1");
}

CostConfig cost_config_from_json_text(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw std::invalid_argument(std::string("invalid cost config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("cost config must be a JSON object");
  CostConfig config;
  for (const auto &[key, value] : doc.items()) {
    if (key == "method") {
      config.method = parse_cost_method(value.get<std::string>());
    } else if (key == "w_s") {
      config.subject_weight = value.get<double>();
    } else if (key == "w_p") {
      config.predicate_weight = value.get<double>();
    } else if (key == "w_o") {
      config.object_weight = value.get<double>();
    } else if (key == "j_star") {
      config.star_weight = value.get<double>();
    } else if (key == "j_chain") {
      config.chain_weight = value.get<double>();
    } else if (key == "j_unusual") {
      config.unusual_weight = value.get<double>();
    } else if (key == "exhaustive_cap") {
      config.exhaustive_cap = value.get<int>();
    } else {
      throw std::invalid_argument("unknown cost config key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

CostConfig load_cost_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cost config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return cost_config_from_json_text(buffer.str());
}

JoinCounts count_joins(const ServicePattern &s) {
  JoinCounts counts;
  for (const auto &[name, occs] : occurrences(s)) {
    for (size_t i = 0; i < occs.size(); ++i) {
      for (size_t j = i + 1; j < occs.size(); ++j) {
        if (occs[i].triple == occs[j].triple) continue;
        const TriplePosition a = occs[i].position;
        const TriplePosition b = occs[j].position;
        if (a == TriplePosition::Predicate || b == TriplePosition::Predicate)
          ++counts.unusual;
        else if (a == b)
          ++counts.star;
        else
          ++counts.chain;
      }
    }
  }
  return counts;
}

CostTerms cost_terms(const ServicePattern &s, const CostConfig &config) {
  const auto occ = occurrences(s);
  std::optional<std::string> endpoint_var;
  if (s.endpoint.kind == TermKind::Variable) endpoint_var = s.endpoint.variable_name();

  // The names the formulas count: the sub-SELECT projection when present,
  // otherwise every graph-pattern variable and blank label plus the
  // endpoint variable.
  std::set<std::string> cost_vars;
  if (s.sub_projection) {
    cost_vars = *s.sub_projection;
  } else {
    for (const auto &[name, _] : occ) cost_vars.insert(name);
    if (endpoint_var) cost_vars.insert(*endpoint_var);
  }

  CostTerms terms;
  if (config.method == CostMethod::VC) {
    terms.base = static_cast<double>(cost_vars.size());
    return terms;
  }

  double denominator = 1.0;
  if (config.method == CostMethod::JWUVC) {
    const JoinCounts joins = count_joins(s);
    denominator += joins.star * config.star_weight + joins.chain * config.chain_weight +
                   joins.unusual * config.unusual_weight;
  }
  static const std::vector<Occurrence> kNoOccurrences;
  for (const auto &name : cost_vars) {
    // The endpoint variable must already be bound for the call to happen,
    // so when it occurs in no triple it never counts as unbound here.
    if (endpoint_var && name == *endpoint_var && !occ.count(name)) continue;
    double weight = 1.0;
    if (config.method != CostMethod::UVC) {
      auto it = occ.find(name);
      weight = position_weight(it == occ.end() ? kNoOccurrences : it->second, config);
    }
    terms.unbound_contributions.emplace_back(name, weight / denominator);
  }
  return terms;
}

double unrestrictiveness(const ServicePattern &s, const BindingSet &bound,
                         const CostConfig &config) {
  const CostTerms terms = cost_terms(s, config);
  double cost = terms.base;
  for (const auto &[name, weight] : terms.unbound_contributions)
    if (!bound.count(name)) cost += weight;
  return cost;
}

int tie_break_score(const ServicePattern &s) {
  int literals = 0;
  for (const auto &triple : s.triples) {
    for (const Term *term : {&triple.subject, &triple.predicate, &triple.object})
      if (term->kind == TermKind::Literal) ++literals;
  }
  return literals + static_cast<int>(s.filter_bodies.size());
}

}  // namespace fedopt
