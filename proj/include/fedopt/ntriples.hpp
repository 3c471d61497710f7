#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedopt {

class NTriplesError : public std::runtime_error {
 public:
  NTriplesError(int line, const std::string &message);
  int line;
};

// One ground triple in canonical text form: IRIs keep their angle
// brackets, literals keep quotes and any @lang / ^^<datatype> suffix,
// blank nodes keep the _: prefix.
struct NTriple {
  std::string subject;
  std::string predicate;
  std::string object;
  auto operator<=>(const NTriple &) const = default;
};

// Line-based N-Triples parsing; `#` comments and blank lines are allowed.
// Escape sequences inside literals are preserved verbatim. Throws
// NTriplesError with a 1-based line number.
std::vector<NTriple> parse_ntriples(const std::string &text);

}  // namespace fedopt
