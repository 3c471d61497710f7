#include "fedopt/query_model.hpp"

namespace fedopt {

std::string Term::variable_name() const {
  if (kind != TermKind::Variable || lexical.empty()) return lexical;
  return lexical.substr(1);
}

Term Term::iri(std::string text) { return {TermKind::Iri, std::move(text)}; }

Term Term::prefixed_name(std::string text) {
  return {TermKind::PrefixedName, std::move(text)};
}

Term Term::variable(std::string text) {
  return {TermKind::Variable, std::move(text)};
}

Term Term::literal(std::string text, bool language_tag, bool datatype) {
  return {TermKind::Literal, std::move(text), language_tag, datatype};
}

Term Term::blank_node(std::string text) {
  return {TermKind::BlankNode, std::move(text)};
}

Term Term::keyword_a() { return {TermKind::KeywordA, "a"}; }

std::vector<const ServicePattern *> FederatedQuery::all_services() const {
  std::vector<const ServicePattern *> out;
  for (const auto &segment : segments)
    for (const auto &service : segment.services) out.push_back(&service);
  return out;
}

int FederatedQuery::service_count() const {
  int n = 0;
  for (const auto &segment : segments) n += static_cast<int>(segment.services.size());
  return n;
}

BindingSet exposed_variables(const ServicePattern &s) {
  if (s.sub_projection) return *s.sub_projection;
  BindingSet names;
  for (const auto &triple : s.triples) {
    for (const Term *term : {&triple.subject, &triple.predicate, &triple.object})
      if (term->is_variable()) names.insert(term->variable_name());
  }
  if (s.endpoint.is_variable()) names.insert(s.endpoint.variable_name());
  return names;
}

std::map<std::string, std::set<TriplePosition>>
variable_positions(const ServicePattern &s, const BindingSet &bound) {
  const BindingSet exposed = exposed_variables(s);
  std::map<std::string, std::set<TriplePosition>> positions;
  auto record = [&](const Term &term, TriplePosition position) {
    if (!term.is_variable()) return;
    const std::string name = term.variable_name();
    if (!exposed.count(name) || bound.count(name)) return;
    positions[name].insert(position);
  };
  for (const auto &triple : s.triples) {
    record(triple.subject, TriplePosition::Subject);
    record(triple.predicate, TriplePosition::Predicate);
    record(triple.object, TriplePosition::Object);
  }
  return positions;
}

}  // namespace fedopt
