#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedopt/cost_model.hpp"
#include "fedopt/parser.hpp"
#include "fedopt/synth.hpp"
#include "support.hpp"

using namespace fedopt;
using testsupport::fixture;

namespace {

// Reference implementation, kept deliberately naive: flat occurrence list,
// quadratic pair scan, no shared helpers with the library.
struct Occurrence {
  int triple;
  int slot;  // 0 subject, 1 predicate, 2 object
  std::string name;
};

std::vector<Occurrence> list_occurrences(const ServicePattern &s) {
  std::vector<Occurrence> out;
  for (int i = 0; i < static_cast<int>(s.triples.size()); ++i) {
    const Term *terms[3] = {&s.triples[i].subject, &s.triples[i].predicate,
                            &s.triples[i].object};
    for (int slot = 0; slot < 3; ++slot) {
      const Term &t = *terms[slot];
      if (t.kind == TermKind::Variable) out.push_back({i, slot, t.variable_name()});
      if (t.kind == TermKind::BlankNode) out.push_back({i, slot, t.lexical});
    }
  }
  return out;
}

JoinCounts reference_joins(const ServicePattern &s) {
  const auto occs = list_occurrences(s);
  JoinCounts counts;
  for (size_t a = 0; a < occs.size(); ++a) {
    for (size_t b = a + 1; b < occs.size(); ++b) {
      if (occs[a].name != occs[b].name) continue;
      if (occs[a].triple == occs[b].triple) continue;
      if (occs[a].slot == 1 || occs[b].slot == 1)
        ++counts.unusual;
      else if (occs[a].slot == occs[b].slot)
        ++counts.star;
      else
        ++counts.chain;
    }
  }
  return counts;
}

double reference_cost(const ServicePattern &s, const BindingSet &bound,
                      const CostConfig &cfg) {
  const auto occs = list_occurrences(s);
  std::map<std::string, std::set<int>> slots;
  for (const auto &occ : occs) slots[occ.name].insert(occ.slot);

  std::optional<std::string> endpoint_var;
  if (s.endpoint.is_variable()) endpoint_var = s.endpoint.variable_name();

  std::set<std::string> counted;
  if (s.sub_projection) {
    counted = *s.sub_projection;
  } else {
    for (const auto &[name, _] : slots) counted.insert(name);
    if (endpoint_var) counted.insert(*endpoint_var);
  }

  if (cfg.method == CostMethod::VC) return static_cast<double>(counted.size());

  double denominator = 1.0;
  if (cfg.method == CostMethod::JWUVC) {
    const JoinCounts joins = reference_joins(s);
    denominator += joins.star * cfg.star_weight + joins.chain * cfg.chain_weight +
                   joins.unusual * cfg.unusual_weight;
  }

  double total = 0.0;
  for (const auto &name : counted) {
    if (bound.count(name)) continue;
    const bool in_triples = slots.count(name) != 0;
    // The endpoint variable is bound by the time the call happens; it only
    // costs anything when it also occupies a triple slot.
    if (endpoint_var && name == *endpoint_var && !in_triples) continue;
    double weight = 1.0;
    if (cfg.method != CostMethod::UVC) {
      const auto &occupied = slots[name];
      if (occupied.count(1))
        weight = cfg.predicate_weight;
      else if (occupied.count(2))
        weight = cfg.object_weight;
      else
        weight = cfg.subject_weight;
    }
    total += weight / denominator;
  }
  return total;
}

// Random subset of the names the pattern could bind, plus a stray name.
BindingSet random_bound(SynthRng &rng, const ServicePattern &s) {
  BindingSet bound;
  for (const auto &occ : list_occurrences(s))
    if (rng.chance(0.4)) bound.insert(occ.name);
  if (rng.chance(0.3)) bound.insert("elsewhere");
  return bound;
}

std::vector<const ServicePattern *> parsed_services(const FederatedQuery &q) {
  return q.all_services();
}

CostConfig with_method(CostMethod method) {
  CostConfig cfg;
  cfg.method = method;
  return cfg;
}

}  // namespace

TEST_CASE("method names parse case-insensitively and print back") {
  CHECK(parse_cost_method("vc") == CostMethod::VC);
  CHECK(parse_cost_method("UVC") == CostMethod::UVC);
  CHECK(parse_cost_method("WuVc") == CostMethod::WUVC);
  CHECK(parse_cost_method("jwuvc") == CostMethod::JWUVC);
  CHECK_THROWS_AS(parse_cost_method("best"), std::invalid_argument);
  for (CostMethod m : {CostMethod::VC, CostMethod::UVC, CostMethod::WUVC,
                       CostMethod::JWUVC})
    CHECK(parse_cost_method(to_string(m)) == m);
}

TEST_CASE("config validation rejects negative weights and a zero cap") {
  CostConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.object_weight = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = CostConfig{};
  cfg.exhaustive_cap = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("config JSON applies known keys and rejects unknown ones") {
  const CostConfig cfg = cost_config_from_json_text(
      "{\"method\": \"uvc\", \"w_p\": 0.2, \"j_star\": 0.4, \"exhaustive_cap\": 7}");
  CHECK(cfg.method == CostMethod::UVC);
  CHECK(cfg.predicate_weight == doctest::Approx(0.2));
  CHECK(cfg.star_weight == doctest::Approx(0.4));
  CHECK(cfg.exhaustive_cap == 7);
  CHECK(cfg.subject_weight == doctest::Approx(1.0));  // untouched default

  CHECK_THROWS_AS(cost_config_from_json_text("{\"wp\": 1}"), std::invalid_argument);
  CHECK_THROWS_AS(cost_config_from_json_text("not json"), std::invalid_argument);
  CHECK_THROWS_AS(cost_config_from_json_text("[1,2]"), std::invalid_argument);
  CHECK_THROWS_AS(cost_config_from_json_text("{\"w_s\": -1}"), std::invalid_argument);
  CHECK_THROWS_AS(load_cost_config("/nonexistent/config.json"), std::runtime_error);
}

TEST_CASE("join classification matches a naive pair scan on random patterns") {
  SynthRng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const ServicePattern s = random_service_pattern(rng, 6);
    CHECK(count_joins(s) == reference_joins(s));
  }
}

TEST_CASE("join kinds from hand-built patterns") {
  FederatedQuery q = parse_query(
      "SELECT * WHERE { SERVICE <http://e> {\n"
      "  ?a <http://p> ?x . ?a <http://q> ?y .\n"  // star on ?a
      "  ?y <http://r> ?z .\n"                     // chain on ?y
      "  ?z ?a <http://o> } }");                   // unusual on ?a (x2), chain on ?z
  const ServicePattern &s = *q.all_services()[0];
  const JoinCounts joins = count_joins(s);
  CHECK(joins.star == 1);
  CHECK(joins.chain == 2);
  CHECK(joins.unusual == 2);
  CHECK(count_joins(s) == reference_joins(s));
}

TEST_CASE("repeating a name inside one triple is not a join") {
  const FederatedQuery q = parse_query(
      "SELECT * WHERE { SERVICE <http://e> { ?x <http://p> ?x } }");
  CHECK(count_joins(*q.all_services()[0]) == JoinCounts{});
}

TEST_CASE("blank labels join like variables") {
  const FederatedQuery q = parse_query(
      "SELECT * WHERE { SERVICE <http://e> {\n"
      "  _:b <http://p> ?x . _:b <http://q> ?y } }");
  const JoinCounts joins = count_joins(*q.all_services()[0]);
  CHECK(joins.star == 1);
}

TEST_CASE("scores match the reference on random patterns and bindings") {
  SynthRng rng(23);
  for (int i = 0; i < 400; ++i) {
    const ServicePattern s = random_service_pattern(rng, 6);
    const BindingSet bound = random_bound(rng, s);
    for (CostMethod m : {CostMethod::VC, CostMethod::UVC, CostMethod::WUVC,
                         CostMethod::JWUVC}) {
      const CostConfig cfg = with_method(m);
      CHECK(unrestrictiveness(s, bound, cfg) ==
            doctest::Approx(reference_cost(s, bound, cfg)).epsilon(1e-12));
    }
  }
}

TEST_CASE("variable counting ignores bindings; unbound counting honors them") {
  const FederatedQuery q = parse_query(fixture("listing2.rq"));
  const ServicePattern &all_vars = *q.all_services()[0];  // ?s ?p ?o
  CHECK(unrestrictiveness(all_vars, {}, with_method(CostMethod::VC)) == 3.0);
  CHECK(unrestrictiveness(all_vars, {"s", "p"}, with_method(CostMethod::VC)) == 3.0);
  CHECK(unrestrictiveness(all_vars, {}, with_method(CostMethod::UVC)) == 3.0);
  CHECK(unrestrictiveness(all_vars, {"s", "p"}, with_method(CostMethod::UVC)) == 1.0);
  CHECK(unrestrictiveness(all_vars, {"s", "p", "o"}, with_method(CostMethod::UVC)) == 0.0);
}

TEST_CASE("unbound variable counts for the second example match hand counts") {
  const FederatedQuery q = parse_query(fixture("listing3.rq"));
  const auto services = parsed_services(q);
  const CostConfig cfg = with_method(CostMethod::UVC);
  CHECK(unrestrictiveness(*services[0], {}, cfg) == 3.0);
  CHECK(unrestrictiveness(*services[1], {}, cfg) == 2.0);
  CHECK(unrestrictiveness(*services[2], {}, cfg) == 3.0);
}

TEST_CASE("position weights for the third example match hand application") {
  const FederatedQuery q = parse_query(fixture("listing4.rq"));
  const auto services = parsed_services(q);
  const CostConfig cfg = with_method(CostMethod::WUVC);
  CHECK(unrestrictiveness(*services[0], {}, cfg) == doctest::Approx(1.0));
  CHECK(unrestrictiveness(*services[1], {}, cfg) == doctest::Approx(0.8));
  CHECK(unrestrictiveness(*services[2], {}, cfg) == doctest::Approx(0.1));
}

TEST_CASE("join-aware scores for the fourth example match hand application") {
  const FederatedQuery q = parse_query(fixture("listing5.rq"));
  const auto services = parsed_services(q);
  const CostConfig cfg = with_method(CostMethod::JWUVC);
  CHECK(unrestrictiveness(*services[0], {}, cfg) == doctest::Approx(1.0 / 1.5));
  CHECK(unrestrictiveness(*services[1], {}, cfg) == doctest::Approx(0.8 / 1.6));
  CHECK(unrestrictiveness(*services[2], {}, cfg) == doctest::Approx(0.1 / 2.0));
}

TEST_CASE("the most restrictive occupied position sets a variable's weight") {
  const FederatedQuery q = parse_query(
      "SELECT * WHERE { SERVICE <http://e> {\n"
      "  ?x <http://p> <http://o> . <http://s> <http://q> ?x . <http://s> ?x <http://o> } }");
  // ?x occupies subject, object and predicate; predicate wins.
  CHECK(unrestrictiveness(*q.all_services()[0], {}, with_method(CostMethod::WUVC)) ==
        doctest::Approx(0.1));
}

TEST_CASE("an endpoint variable absent from the triples costs nothing itself") {
  const FederatedQuery q = parse_query(
      "SELECT * WHERE {\n"
      "  SERVICE <http://a> { ?s <http://p> ?ep }\n"
      "  SERVICE ?ep { ?s <http://q> <http://o> } }");
  const ServicePattern &dependent = *q.all_services()[1];
  // VC still counts it as a clause variable.
  CHECK(unrestrictiveness(dependent, {}, with_method(CostMethod::VC)) == 2.0);
  // For its own execution it is necessarily bound already.
  CHECK(unrestrictiveness(dependent, {}, with_method(CostMethod::UVC)) == 1.0);
  CHECK(unrestrictiveness(dependent, {}, with_method(CostMethod::WUVC)) ==
        doctest::Approx(1.0));
}

TEST_CASE("an endpoint variable inside the triples is counted there") {
  const FederatedQuery q = parse_query(
      "SELECT * WHERE { SERVICE ?ep { <http://s> <http://p> ?ep } }");
  const ServicePattern &s = *q.all_services()[0];
  CHECK(unrestrictiveness(s, {}, with_method(CostMethod::UVC)) == 1.0);
  CHECK(unrestrictiveness(s, {}, with_method(CostMethod::WUVC)) == doctest::Approx(0.8));
  CHECK(unrestrictiveness(s, {"ep"}, with_method(CostMethod::UVC)) == 0.0);
}

TEST_CASE("a sub-select narrows the counted variables to its projection") {
  const FederatedQuery q = parse_query(
      "SELECT * WHERE { SERVICE <http://e> {\n"
      "  SELECT ?a WHERE { ?a <http://p> ?b . ?b <http://q> ?c } } }");
  const ServicePattern &s = *q.all_services()[0];
  CHECK(unrestrictiveness(s, {}, with_method(CostMethod::VC)) == 1.0);
  CHECK(unrestrictiveness(s, {}, with_method(CostMethod::UVC)) == 1.0);
  CHECK(unrestrictiveness(s, {"a"}, with_method(CostMethod::UVC)) == 0.0);
  // ?a occupies only a subject slot.
  CHECK(unrestrictiveness(s, {}, with_method(CostMethod::WUVC)) == doctest::Approx(1.0));
}

TEST_CASE("blank labels always count as unbound") {
  const FederatedQuery q = parse_query(
      "SELECT * WHERE { SERVICE <http://e> { _:b <http://p> <http://o> } }");
  const ServicePattern &s = *q.all_services()[0];
  CHECK(unrestrictiveness(s, {}, with_method(CostMethod::UVC)) == 1.0);
  // A variable that merely shares the label's name must not capture it.
  CHECK(unrestrictiveness(s, {"b"}, with_method(CostMethod::UVC)) == 1.0);
}

TEST_CASE("cost terms decompose the score and list names in order") {
  const FederatedQuery q = parse_query(fixture("listing3.rq"));
  const CostConfig cfg = with_method(CostMethod::WUVC);
  const ServicePattern &s = *q.all_services()[2];  // ?entity2, ?place1, ?place2
  const CostTerms terms = cost_terms(s, cfg);
  CHECK(terms.base == 0.0);
  REQUIRE(terms.unbound_contributions.size() == 3);
  for (size_t i = 1; i < terms.unbound_contributions.size(); ++i)
    CHECK(terms.unbound_contributions[i - 1].first <
          terms.unbound_contributions[i].first);
  double sum = terms.base;
  for (const auto &[name, weight] : terms.unbound_contributions) sum += weight;
  CHECK(sum == doctest::Approx(unrestrictiveness(s, {}, cfg)));
}

TEST_CASE("tie-break scores count literals and filters") {
  const FederatedQuery q = parse_query(
      "SELECT * WHERE {\n"
      "  SERVICE <http://a> { ?s <http://p> \"x\" . ?s <http://q> 4 . FILTER (?s != 1) }\n"
      "  SERVICE <http://b> { ?s <http://p> ?o } }");
  CHECK(tie_break_score(*q.all_services()[0]) == 3);
  CHECK(tie_break_score(*q.all_services()[1]) == 0);
}
