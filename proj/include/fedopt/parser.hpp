#pragma once

#include <stdexcept>
#include <string>

#include "fedopt/query_model.hpp"

namespace fedopt {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnsupportedConstruct };

  ParseError(Kind kind, int line, int column, const std::string &message);

  Kind kind;
  int line = 0;
  int column = 0;
  std::string message;
};

/// Parses the supported federated-query subset:
///
///   prologue SELECT projection WHERE { (SERVICE-block | OPTIONAL { SERVICE-block+ })+ } tail
///
/// A SERVICE body is either triple patterns (with `;`/`,` abbreviations and
/// FILTER(...) constraints) or a single `SELECT ?v+ WHERE { ... }` sub-select.
/// UNION, top-level triple patterns, nested SERVICE and other nested groups
/// raise ParseError with Kind::UnsupportedConstruct.
FederatedQuery parse_query(const std::string &text);

/// Emits query text that parses back to a structurally equal query.
std::string serialize_query(const FederatedQuery &query);

}  // namespace fedopt
