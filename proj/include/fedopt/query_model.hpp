#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fedopt {

/// Kinds of RDF terms the supported query subset can contain.
enum class TermKind { Iri, PrefixedName, Variable, Literal, BlankNode, KeywordA };

/// One RDF term. The exact surface text is kept so serialization is
/// byte-faithful; `?x` and `$x` denote the same variable.
struct Term {
  TermKind kind = TermKind::Iri;
  std::string lexical;
  bool has_language_tag = false;
  bool has_datatype = false;

  bool operator==(const Term &) const = default;

  bool is_variable() const { return kind == TermKind::Variable; }
  /// Variable name without the `?`/`$` sigil.
  std::string variable_name() const;

  static Term iri(std::string text);
  static Term prefixed_name(std::string text);
  static Term variable(std::string text);
  static Term literal(std::string text, bool language_tag = false, bool datatype = false);
  static Term blank_node(std::string text);
  static Term keyword_a();
};

enum class TriplePosition { Subject, Predicate, Object };

struct TriplePattern {
  Term subject;
  Term predicate;
  Term object;

  bool operator==(const TriplePattern &) const = default;
};

/// Set of variable names (sigil-free, case-sensitive).
using BindingSet = std::set<std::string>;

/// One SERVICE block. Predicate-object abbreviations are already expanded;
/// FILTER bodies are kept as opaque text.
struct ServicePattern {
  Term endpoint;  // Iri, PrefixedName or Variable
  bool silent = false;
  std::vector<TriplePattern> triples;
  std::vector<std::string> filter_bodies;
  std::optional<BindingSet> sub_projection;  // present iff the body is a sub-SELECT
  int original_index = 0;                    // 0-based position among SERVICE blocks

  bool operator==(const ServicePattern &) const = default;
};

/// A maximal run of SERVICE blocks that may be reordered among themselves.
/// OPTIONAL groups form their own segments.
struct QuerySegment {
  std::vector<ServicePattern> services;
  bool inside_optional = false;

  bool operator==(const QuerySegment &) const = default;
};

struct FederatedQuery {
  std::string prologue;    // BASE/PREFIX declarations, verbatim
  std::string projection;  // text between SELECT and WHERE, verbatim
  std::vector<QuerySegment> segments;
  std::string tail;        // GROUP BY / ORDER BY / LIMIT ..., verbatim

  bool operator==(const FederatedQuery &) const = default;

  std::vector<const ServicePattern *> all_services() const;
  int service_count() const;
};

/// Variables a SERVICE makes available to the rest of the query: the
/// sub-SELECT projection when present, otherwise every variable of its
/// triples plus the endpoint variable.
BindingSet exposed_variables(const ServicePattern &s);

/// Positions occupied by each exposed variable that is not already bound.
std::map<std::string, std::set<TriplePosition>>
variable_positions(const ServicePattern &s, const BindingSet &bound);

}  // namespace fedopt
