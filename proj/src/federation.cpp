#include "fedopt/federation.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "fedopt/planner.hpp"

namespace fedopt {

namespace {

constexpr const char *kRdfType = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";
constexpr const char *kXsdNamespace = "http://www.w3.org/2001/XMLSchema#";

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

bool is_iri(const std::string &term) { return !term.empty() && term.front() == '<'; }

std::string bare_iri(const std::string &term) {
  return is_iri(term) ? term.substr(1, term.size() - 2) : term;
}

bool is_number_lexical(std::string_view text) {
  size_t i = 0;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
  size_t digits = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++digits;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
    size_t exponent_digits = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++exponent_digits;
    if (exponent_digits == 0) return false;
  }
  return i == text.size();
}

bool is_numeric_datatype(std::string_view iri) {
  if (iri.substr(0, std::string_view(kXsdNamespace).size()) != kXsdNamespace) return false;
  static const std::set<std::string_view> kNames = {
      "integer", "decimal", "double", "float", "int", "long", "short", "byte",
      "unsignedLong", "unsignedInt", "unsignedShort", "unsignedByte",
      "nonNegativeInteger", "nonPositiveInteger", "negativeInteger", "positiveInteger"};
  return kNames.count(iri.substr(std::string_view(kXsdNamespace).size())) > 0;
}

// Splits a canonical literal into the raw content between the quotes and
// the suffix after the closing quote (e.g. @en or ^^<...>).
bool split_literal(const std::string &term, std::string &content, std::string &suffix) {
  if (term.size() < 2 || term.front() != '"') return false;
  size_t i = 1;
  while (i < term.size() && term[i] != '"') {
    if (term[i] == '\\') ++i;
    ++i;
  }
  if (i >= term.size()) return false;
  content = term.substr(1, i - 1);
  suffix = term.substr(i + 1);
  return true;
}

// Value of a numeric term: a bare number lexical or a literal typed with a
// numeric XSD datatype.
std::optional<double> numeric_value(const std::string &term) {
  if (term.empty()) return std::nullopt;
  if (is_number_lexical(term)) return std::stod(term);
  std::string content;
  std::string suffix;
  if (!split_literal(term, content, suffix)) return std::nullopt;
  if (suffix.size() < 4 || suffix[0] != '^' || suffix[1] != '^' || suffix[2] != '<' ||
      suffix.back() != '>')
    return std::nullopt;
  if (!is_numeric_datatype(std::string_view(suffix).substr(3, suffix.size() - 4)))
    return std::nullopt;
  if (!is_number_lexical(content)) return std::nullopt;
  return std::stod(content);
}

// A query constant matches a data term when the texts are identical or
// both are numeric with equal values (decimal equality bridges `25` and
// `"25"^^<...integer>`).
bool term_matches(const std::string &query_constant, const std::string &data_term) {
  if (query_constant == data_term) return true;
  const auto a = numeric_value(query_constant);
  if (!a) return false;
  const auto b = numeric_value(data_term);
  return b && *a == *b;
}

using PrefixMap = std::map<std::string, std::string>;

PrefixMap parse_prefixes(const std::string &prologue) {
  PrefixMap prefixes;
  size_t i = 0;
  const size_t n = prologue.size();
  auto skip_space = [&] {
    while (i < n && std::isspace(static_cast<unsigned char>(prologue[i]))) ++i;
  };
  while (true) {
    skip_space();
    if (i >= n) break;
    if (prologue[i] == '.') {
      ++i;
      continue;
    }
    size_t word_begin = i;
    while (i < n && std::isalpha(static_cast<unsigned char>(prologue[i]))) ++i;
    const std::string_view word(prologue.data() + word_begin, i - word_begin);
    if (iequals(word, "PREFIX")) {
      skip_space();
      size_t name_begin = i;
      while (i < n && prologue[i] != ':' &&
             !std::isspace(static_cast<unsigned char>(prologue[i])))
        ++i;
      std::string name = prologue.substr(name_begin, i - name_begin);
      skip_space();
      if (i >= n || prologue[i] != ':')
        throw std::invalid_argument("malformed PREFIX declaration in prologue");
      ++i;
      skip_space();
      if (i >= n || prologue[i] != '<')
        throw std::invalid_argument("PREFIX declaration is missing its IRI");
      size_t iri_begin = ++i;
      while (i < n && prologue[i] != '>') ++i;
      if (i >= n) throw std::invalid_argument("unterminated IRI in PREFIX declaration");
      prefixes[name] = prologue.substr(iri_begin, i - iri_begin);
      ++i;
    } else if (iequals(word, "BASE")) {
      // Relative IRI resolution is not modeled; the declaration is skipped.
      skip_space();
      if (i < n && prologue[i] == '<') {
        while (i < n && prologue[i] != '>') ++i;
        if (i < n) ++i;
      }
    } else {
      if (i == word_begin) ++i;
    }
  }
  return prefixes;
}

std::string expand_prefixed_name(const std::string &text, const PrefixMap &prefixes) {
  const size_t colon = text.find(':');
  const std::string prefix = text.substr(0, colon);
  const std::string local = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto it = prefixes.find(prefix);
  if (it == prefixes.end())
    throw std::invalid_argument("prefix '" + prefix + ":' is not declared in the query prologue");
  return "<" + it->second + local + ">";
}

std::string canonical_literal(const Term &term, const PrefixMap &prefixes) {
  if (!term.has_datatype) return term.lexical;
  const size_t marker = term.lexical.rfind("^^");
  if (marker == std::string::npos) return term.lexical;
  const std::string datatype = term.lexical.substr(marker + 2);
  if (!datatype.empty() && datatype.front() == '<') return term.lexical;
  return term.lexical.substr(0, marker + 2) + expand_prefixed_name(datatype, prefixes);
}

struct Slot {
  bool is_var = false;
  std::string text;  // variable name when is_var, canonical term otherwise
};

struct CompiledPattern {
  std::array<Slot, 3> slots;
};

enum class FilterOp { Eq, Ne, Lt, Le, Gt, Ge };

struct CompiledFilter {
  bool is_regex = false;
  std::string var;
  FilterOp op = FilterOp::Eq;
  std::string constant;  // canonical term, or the substring for regex
};

struct CompiledServiceSim {
  int original_index = 0;
  bool variable_endpoint = false;
  std::string endpoint;  // bare IRI, or the variable name
  std::vector<CompiledPattern> patterns;
  std::set<std::string> user_vars;  // graph-pattern variables (not blanks)
  std::vector<CompiledFilter> filters;
};

struct SimContext {
  const Federation *fed = nullptr;
  PrefixMap prefixes;
  std::map<int, CompiledServiceSim> services;  // by original_index
};

// Minimal filter term scanner over `FILTER (body)` contents.
class FilterScanner {
 public:
  FilterScanner(const std::string &body, const PrefixMap &prefixes)
      : body_(body), prefixes_(prefixes) {}

  CompiledFilter parse() {
    skip_space();
    if (match_word("regex")) return parse_regex();
    CompiledFilter filter;
    bool left_is_var = false;
    std::string left = term(left_is_var);
    const FilterOp op = relation();
    bool right_is_var = false;
    std::string right = term(right_is_var);
    skip_space();
    if (pos_ != body_.size() || left_is_var == right_is_var) unsupported();
    if (left_is_var) {
      filter.var = left;
      filter.op = op;
      filter.constant = right;
    } else {
      filter.var = right;
      filter.op = flip(op);
      filter.constant = left;
    }
    return filter;
  }

 private:
  [[noreturn]] void unsupported() const { throw UnsupportedFilter(body_); }

  void skip_space() {
    while (pos_ < body_.size() && std::isspace(static_cast<unsigned char>(body_[pos_]))) ++pos_;
  }

  bool match_word(std::string_view word) {
    if (pos_ + word.size() > body_.size()) return false;
    if (!iequals(std::string_view(body_).substr(pos_, word.size()), word)) return false;
    const size_t after = pos_ + word.size();
    if (after < body_.size() && (std::isalnum(static_cast<unsigned char>(body_[after])) ||
                                 body_[after] == '_'))
      return false;
    pos_ = after;
    return true;
  }

  CompiledFilter parse_regex() {
    CompiledFilter filter;
    filter.is_regex = true;
    skip_space();
    expect('(');
    skip_space();
    filter.var = variable();
    skip_space();
    expect(',');
    skip_space();
    filter.constant = quoted_content();
    skip_space();
    expect(')');
    skip_space();
    if (pos_ != body_.size()) unsupported();
    return filter;
  }

  void expect(char c) {
    if (pos_ >= body_.size() || body_[pos_] != c) unsupported();
    ++pos_;
  }

  std::string variable() {
    if (pos_ >= body_.size() || (body_[pos_] != '?' && body_[pos_] != '$')) unsupported();
    ++pos_;
    const size_t begin = pos_;
    while (pos_ < body_.size() && (std::isalnum(static_cast<unsigned char>(body_[pos_])) ||
                                   body_[pos_] == '_'))
      ++pos_;
    if (pos_ == begin) unsupported();
    return body_.substr(begin, pos_ - begin);
  }

  std::string quoted_content() {
    if (pos_ >= body_.size() || body_[pos_] != '"') unsupported();
    ++pos_;
    const size_t begin = pos_;
    while (pos_ < body_.size() && body_[pos_] != '"') {
      if (body_[pos_] == '\\') ++pos_;
      ++pos_;
    }
    if (pos_ >= body_.size()) unsupported();
    const std::string content = body_.substr(begin, pos_ - begin);
    ++pos_;
    return content;
  }

  std::string term(bool &is_var) {
    skip_space();
    if (pos_ >= body_.size()) unsupported();
    const char c = body_[pos_];
    if (c == '?' || c == '$') {
      is_var = true;
      return variable();
    }
    is_var = false;
    if (c == '<') {
      const size_t begin = pos_;
      while (pos_ < body_.size() && body_[pos_] != '>') ++pos_;
      if (pos_ >= body_.size()) unsupported();
      ++pos_;
      return body_.substr(begin, pos_ - begin);
    }
    if (c == '"') {
      const size_t begin = pos_;
      quoted_content();
      if (pos_ < body_.size() && body_[pos_] == '@') {
        ++pos_;
        while (pos_ < body_.size() && (std::isalnum(static_cast<unsigned char>(body_[pos_])) ||
                                       body_[pos_] == '-'))
          ++pos_;
      } else if (pos_ + 1 < body_.size() && body_[pos_] == '^' && body_[pos_ + 1] == '^') {
        pos_ += 2;
        if (pos_ < body_.size() && body_[pos_] == '<') {
          while (pos_ < body_.size() && body_[pos_] != '>') ++pos_;
          if (pos_ >= body_.size()) unsupported();
          ++pos_;
        } else {
          const size_t name_begin = pos_;
          while (pos_ < body_.size() && !std::isspace(static_cast<unsigned char>(body_[pos_])) &&
                 body_[pos_] != ')')
            ++pos_;
          const std::string expanded =
              expand_prefixed_name(body_.substr(name_begin, pos_ - name_begin), prefixes_);
          return body_.substr(begin, name_begin - begin) + expanded;
        }
      }
      return body_.substr(begin, pos_ - begin);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') {
      const size_t begin = pos_;
      while (pos_ < body_.size() && !std::isspace(static_cast<unsigned char>(body_[pos_])) &&
             body_[pos_] != ')' && body_[pos_] != ',' && body_[pos_] != '=' &&
             body_[pos_] != '!' && body_[pos_] != '<' && body_[pos_] != '>')
        ++pos_;
      const std::string text = body_.substr(begin, pos_ - begin);
      if (!is_number_lexical(text)) unsupported();
      return text;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == ':' || c == '_') {
      const size_t begin = pos_;
      while (pos_ < body_.size() && !std::isspace(static_cast<unsigned char>(body_[pos_])) &&
             body_[pos_] != ')' && body_[pos_] != ',' && body_[pos_] != '=' &&
             body_[pos_] != '!' && body_[pos_] != '<' && body_[pos_] != '>')
        ++pos_;
      const std::string text = body_.substr(begin, pos_ - begin);
      if (iequals(text, "true") || iequals(text, "false")) return text;
      if (text.find(':') == std::string::npos) unsupported();
      return expand_prefixed_name(text, prefixes_);
    }
    unsupported();
  }

  FilterOp relation() {
    skip_space();
    if (pos_ >= body_.size()) unsupported();
    const char c = body_[pos_];
    if (c == '=') {
      ++pos_;
      return FilterOp::Eq;
    }
    if (c == '!') {
      ++pos_;
      expect('=');
      return FilterOp::Ne;
    }
    if (c == '<') {
      ++pos_;
      if (pos_ < body_.size() && body_[pos_] == '=') {
        ++pos_;
        return FilterOp::Le;
      }
      return FilterOp::Lt;
    }
    if (c == '>') {
      ++pos_;
      if (pos_ < body_.size() && body_[pos_] == '=') {
        ++pos_;
        return FilterOp::Ge;
      }
      return FilterOp::Gt;
    }
    unsupported();
  }

  static FilterOp flip(FilterOp op) {
    switch (op) {
      case FilterOp::Lt: return FilterOp::Gt;
      case FilterOp::Le: return FilterOp::Ge;
      case FilterOp::Gt: return FilterOp::Lt;
      case FilterOp::Ge: return FilterOp::Le;
      default: return op;
    }
  }

  const std::string &body_;
  const PrefixMap &prefixes_;
  size_t pos_ = 0;
};

// Comparable text for ordered literal/IRI comparison.
std::string comparison_text(const std::string &term) {
  std::string content;
  std::string suffix;
  if (split_literal(term, content, suffix)) return content;
  if (is_iri(term)) return bare_iri(term);
  return term;
}

bool apply_op(FilterOp op, int cmp) {
  switch (op) {
    case FilterOp::Eq: return cmp == 0;
    case FilterOp::Ne: return cmp != 0;
    case FilterOp::Lt: return cmp < 0;
    case FilterOp::Le: return cmp <= 0;
    case FilterOp::Gt: return cmp > 0;
    case FilterOp::Ge: return cmp >= 0;
  }
  return false;
}

bool filter_passes(const CompiledFilter &filter, const Solution &row) {
  auto it = row.find(filter.var);
  if (it == row.end()) return false;
  const std::string &value = it->second;
  if (filter.is_regex) {
    std::string content;
    std::string suffix;
    if (!split_literal(value, content, suffix)) return false;
    return content.find(filter.constant) != std::string::npos;
  }
  const auto left = numeric_value(value);
  const auto right = numeric_value(filter.constant);
  if (left && right) {
    const int cmp = *left < *right ? -1 : (*left > *right ? 1 : 0);
    return apply_op(filter.op, cmp);
  }
  if (filter.op == FilterOp::Eq) return value == filter.constant;
  if (filter.op == FilterOp::Ne) return value != filter.constant;
  const int cmp = comparison_text(value).compare(comparison_text(filter.constant));
  return apply_op(filter.op, cmp < 0 ? -1 : (cmp > 0 ? 1 : 0));
}

Slot compile_slot(const Term &term, int original_index, const PrefixMap &prefixes) {
  Slot slot;
  switch (term.kind) {
    case TermKind::Variable:
      slot.is_var = true;
      slot.text = term.variable_name();
      break;
    case TermKind::BlankNode:
      // Blank nodes are service-scoped existentials: hide them behind a
      // name no user variable can collide with, drop them after the join.
      slot.is_var = true;
      slot.text = "_:" + std::to_string(original_index) + ":" + term.lexical.substr(2);
      break;
    case TermKind::Iri:
      slot.text = term.lexical;
      break;
    case TermKind::PrefixedName:
      slot.text = expand_prefixed_name(term.lexical, prefixes);
      break;
    case TermKind::KeywordA:
      slot.text = kRdfType;
      break;
    case TermKind::Literal:
      slot.text = canonical_literal(term, prefixes);
      break;
  }
  return slot;
}

bool is_hidden(const std::string &name) { return name.starts_with("_:"); }

SimContext compile_query(const FederatedQuery &q, const Federation &fed) {
  SimContext ctx;
  ctx.fed = &fed;
  ctx.prefixes = parse_prefixes(q.prologue);
  for (const QuerySegment &segment : q.segments) {
    for (const ServicePattern &s : segment.services) {
      if (s.sub_projection)
        throw std::invalid_argument("the simulator does not evaluate sub-SELECT bodies");
      CompiledServiceSim c;
      c.original_index = s.original_index;
      if (s.endpoint.kind == TermKind::Variable) {
        c.variable_endpoint = true;
        c.endpoint = s.endpoint.variable_name();
      } else {
        const std::string canonical = s.endpoint.kind == TermKind::PrefixedName
                                          ? expand_prefixed_name(s.endpoint.lexical, ctx.prefixes)
                                          : s.endpoint.lexical;
        c.endpoint = bare_iri(canonical);
        if (!fed.stores.count(c.endpoint)) throw UnknownEndpoint(c.endpoint);
      }
      for (const TriplePattern &t : s.triples) {
        CompiledPattern p;
        p.slots[0] = compile_slot(t.subject, s.original_index, ctx.prefixes);
        p.slots[1] = compile_slot(t.predicate, s.original_index, ctx.prefixes);
        p.slots[2] = compile_slot(t.object, s.original_index, ctx.prefixes);
        for (const Slot &slot : p.slots)
          if (slot.is_var && !is_hidden(slot.text)) c.user_vars.insert(slot.text);
        c.patterns.push_back(std::move(p));
      }
      for (const std::string &body : s.filter_bodies)
        c.filters.push_back(FilterScanner(body, ctx.prefixes).parse());
      ctx.services.emplace(s.original_index, std::move(c));
    }
  }
  return ctx;
}

const std::string &pattern_term(const NTriple &triple, size_t position) {
  switch (position) {
    case 0: return triple.subject;
    case 1: return triple.predicate;
    default: return triple.object;
  }
}

constexpr TriplePosition kPositions[3] = {TriplePosition::Subject, TriplePosition::Predicate,
                                          TriplePosition::Object};

// Backtracking conjunctive matcher for one service body against one store.
class ServiceMatcher {
 public:
  ServiceMatcher(const TripleStore &store, const std::vector<CompiledPattern> &patterns,
                 const Solution &fixed)
      : store_(store), patterns_(patterns), fixed_(fixed) {}

  std::vector<Solution> run() {
    match(0);
    return std::move(results_);
  }

 private:
  const std::string *resolve(const Slot &slot) const {
    if (!slot.is_var) return &slot.text;
    auto fixed = fixed_.find(slot.text);
    if (fixed != fixed_.end()) return &fixed->second;
    auto assigned = assignment_.find(slot.text);
    if (assigned != assignment_.end()) return &assigned->second;
    return nullptr;
  }

  void match(size_t index) {
    if (index == patterns_.size()) {
      results_.push_back(assignment_);
      return;
    }
    const CompiledPattern &pattern = patterns_[index];

    // Narrow candidates through the exact-term index when a resolved slot
    // allows it; query constants with numeric readings must scan because
    // value-equal data spellings differ textually.
    const std::vector<int> *candidates = nullptr;
    for (size_t k = 0; k < 3; ++k) {
      const Slot &slot = pattern.slots[k];
      const std::string *value = resolve(slot);
      if (!value) continue;
      if (!slot.is_var && numeric_value(*value)) continue;
      const std::vector<int> &bucket = store_.with_term(kPositions[k], *value);
      if (!candidates || bucket.size() < candidates->size()) candidates = &bucket;
    }

    auto try_triple = [&](const NTriple &triple) {
      std::vector<const std::string *> bound_here;
      bool ok = true;
      for (size_t k = 0; k < 3 && ok; ++k) {
        const Slot &slot = pattern.slots[k];
        const std::string &term = pattern_term(triple, k);
        if (!slot.is_var) {
          ok = term_matches(slot.text, term);
          continue;
        }
        if (const std::string *value = resolve(slot)) {
          ok = *value == term;
          continue;
        }
        auto [it, inserted] = assignment_.emplace(slot.text, term);
        if (inserted)
          bound_here.push_back(&it->first);
        else
          ok = it->second == term;
      }
      if (ok) match(index + 1);
      for (const std::string *name : bound_here) assignment_.erase(*name);
    };

    if (candidates) {
      for (int idx : *candidates) try_triple(store_.triples()[static_cast<size_t>(idx)]);
    } else {
      for (const NTriple &triple : store_.triples()) try_triple(triple);
    }
  }

  const TripleStore &store_;
  const std::vector<CompiledPattern> &patterns_;
  const Solution &fixed_;
  Solution assignment_;
  std::vector<Solution> results_;
};

struct Row {
  Solution binds;
  int origin = -1;
};

struct StepOutcome {
  std::vector<Row> rows;
  int calls = 0;
};

bool passes_filters(const CompiledServiceSim &s, const Solution &row) {
  for (const CompiledFilter &filter : s.filters)
    if (!filter_passes(filter, row)) return false;
  return true;
}

StepOutcome run_service(const SimContext &ctx, const CompiledServiceSim &s,
                        const std::vector<Row> &rows) {
  StepOutcome out;

  std::set<std::string> bound_somewhere;
  for (const Row &row : rows)
    for (const auto &[name, value] : row.binds) bound_somewhere.insert(name);
  std::vector<std::string> relevant;
  for (const std::string &name : s.user_vars)
    if (bound_somewhere.count(name)) relevant.push_back(name);

  auto project = [&](const Row &row) {
    Solution projection;
    for (const std::string &name : relevant) {
      auto it = row.binds.find(name);
      if (it != row.binds.end()) projection.emplace(name, it->second);
    }
    return projection;
  };

  auto emit = [&](const TripleStore *store, const Solution &projection,
                  const std::vector<size_t> &members) {
    if (!store) return;
    std::vector<Solution> matches = ServiceMatcher(*store, s.patterns, projection).run();
    if (matches.empty()) return;
    for (size_t member : members) {
      for (const Solution &match : matches) {
        Row merged = rows[member];
        for (const auto &[name, value] : match)
          if (!is_hidden(name)) merged.binds[name] = value;
        if (passes_filters(s, merged.binds)) out.rows.push_back(std::move(merged));
      }
    }
  };

  if (!s.variable_endpoint) {
    const TripleStore &store = ctx.fed->stores.at(s.endpoint);
    std::map<Solution, std::vector<size_t>> groups;
    for (size_t i = 0; i < rows.size(); ++i) groups[project(rows[i])].push_back(i);
    out.calls = static_cast<int>(std::max<size_t>(1, groups.size()));
    for (const auto &[projection, members] : groups) emit(&store, projection, members);
    return out;
  }

  // Variable endpoint: one call per distinct IRI; rows with the endpoint
  // variable unbound or bound to a non-IRI produce nothing here (an
  // enclosing OPTIONAL segment retains them through the origin merge).
  std::set<std::string> iris;
  std::map<std::pair<std::string, Solution>, std::vector<size_t>> groups;
  for (size_t i = 0; i < rows.size(); ++i) {
    auto it = rows[i].binds.find(s.endpoint);
    if (it == rows[i].binds.end() || !is_iri(it->second)) continue;
    iris.insert(it->second);
    groups[{it->second, project(rows[i])}].push_back(i);
  }
  out.calls = static_cast<int>(iris.size());
  for (const auto &[key, members] : groups) {
    auto store = ctx.fed->stores.find(bare_iri(key.first));
    emit(store == ctx.fed->stores.end() ? nullptr : &store->second, key.second, members);
  }
  return out;
}

struct SegmentOutcome {
  std::vector<Row> rows;
  std::vector<ServiceCalls> calls;
  std::vector<int> sizes;
};

SegmentOutcome run_segment(const SimContext &ctx, const QuerySegment &segment,
                           const std::vector<int> &order, const std::vector<Row> &input) {
  SegmentOutcome out;
  std::vector<Row> rows = input;
  if (segment.inside_optional)
    for (size_t i = 0; i < rows.size(); ++i) rows[i].origin = static_cast<int>(i);

  for (int original_index : order) {
    const CompiledServiceSim &s = ctx.services.at(original_index);
    StepOutcome step = run_service(ctx, s, rows);
    rows = std::move(step.rows);
    out.calls.push_back({original_index, step.calls});
    out.sizes.push_back(static_cast<int>(rows.size()));
  }

  if (segment.inside_optional) {
    // Left outer join: inputs whose branch produced nothing survive
    // unextended; the segment's final size reflects the merge.
    std::vector<char> covered(input.size(), 0);
    for (const Row &row : rows)
      if (row.origin >= 0) covered[static_cast<size_t>(row.origin)] = 1;
    std::vector<Row> merged;
    std::map<int, std::vector<Row>> by_origin;
    for (Row &row : rows) by_origin[row.origin].push_back(std::move(row));
    for (size_t i = 0; i < input.size(); ++i) {
      if (covered[i]) {
        for (Row &row : by_origin[static_cast<int>(i)]) {
          row.origin = -1;
          merged.push_back(std::move(row));
        }
      } else {
        Row kept = input[i];
        kept.origin = -1;
        merged.push_back(std::move(kept));
      }
    }
    rows = std::move(merged);
    if (!out.sizes.empty()) out.sizes.back() = static_cast<int>(rows.size());
  }

  out.rows = std::move(rows);
  return out;
}

std::vector<int> source_order(const QuerySegment &segment) {
  std::vector<int> order;
  order.reserve(segment.services.size());
  for (const ServicePattern &s : segment.services) order.push_back(s.original_index);
  return order;
}

void append_outcome(SimulationResult &result, const SegmentOutcome &outcome) {
  for (const ServiceCalls &calls : outcome.calls) {
    result.per_service_calls.push_back(calls);
    result.total_calls += calls.calls;
  }
  result.intermediate_sizes.insert(result.intermediate_sizes.end(), outcome.sizes.begin(),
                                   outcome.sizes.end());
}

std::vector<Solution> strip_rows(std::vector<Row> rows) {
  std::vector<Solution> solutions;
  solutions.reserve(rows.size());
  for (Row &row : rows) solutions.push_back(std::move(row.binds));
  return solutions;
}

}  // namespace

UnknownEndpoint::UnknownEndpoint(const std::string &iri_)
    : std::runtime_error("unknown endpoint: " + iri_), iri(iri_) {}

UnsupportedFilter::UnsupportedFilter(const std::string &body_)
    : std::runtime_error("unsupported FILTER form: " + body_), body(body_) {}

TripleStore::TripleStore(std::vector<NTriple> triples) : triples_(std::move(triples)) {
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());
  for (size_t i = 0; i < triples_.size(); ++i) {
    index_[0][triples_[i].subject].push_back(static_cast<int>(i));
    index_[1][triples_[i].predicate].push_back(static_cast<int>(i));
    index_[2][triples_[i].object].push_back(static_cast<int>(i));
  }
}

const std::vector<int> &TripleStore::with_term(TriplePosition position,
                                               const std::string &term) const {
  static const std::vector<int> kEmpty;
  const auto &map = index_[static_cast<size_t>(position)];
  auto it = map.find(term);
  return it == map.end() ? kEmpty : it->second;
}

Federation load_federation(const std::string &manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open federation manifest: " + manifest_path);
  std::ostringstream buffer;
  buffer << in.rdbuf();

  std::set<std::string> seen;
  auto callback = [&seen](int depth, nlohmann::json::parse_event_t event,
                          nlohmann::json &parsed) {
    if (event == nlohmann::json::parse_event_t::key && depth == 1) {
      const std::string key = parsed.get<std::string>();
      if (!seen.insert(key).second)
        throw std::runtime_error("duplicate endpoint IRI in manifest: " + key);
    }
    return true;
  };
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buffer.str(), callback);
  } catch (const nlohmann::json::parse_error &e) {
    throw std::runtime_error("invalid federation manifest " + manifest_path + ": " + e.what());
  }
  if (!doc.is_object())
    throw std::runtime_error("federation manifest must be a JSON object: " + manifest_path);

  const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
  Federation fed;
  for (const auto &[iri, value] : doc.items()) {
    if (!value.is_string())
      throw std::runtime_error("manifest entry for " + iri + " must be a file path string");
    const std::filesystem::path path = base / value.get<std::string>();
    std::ifstream data(path);
    if (!data) throw std::runtime_error("cannot open N-Triples file: " + path.string());
    std::ostringstream content;
    content << data.rdbuf();
    try {
      fed.stores.emplace(iri, TripleStore(parse_ntriples(content.str())));
    } catch (const NTriplesError &e) {
      throw std::runtime_error(path.string() + ": " + e.what());
    }
  }
  return fed;
}

SimulationResult evaluate_sequence(const FederatedQuery &q, const Federation &fed) {
  const auto start = std::chrono::steady_clock::now();
  const SimContext ctx = compile_query(q, fed);
  SimulationResult result;
  std::vector<Row> rows{Row{}};
  for (const QuerySegment &segment : q.segments) {
    SegmentOutcome outcome = run_segment(ctx, segment, source_order(segment), rows);
    rows = std::move(outcome.rows);
    append_outcome(result, outcome);
  }
  result.solutions = strip_rows(std::move(rows));
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SimulatedOptimal simulated_optimal(const FederatedQuery &q, const Federation &fed,
                                   int exhaustive_cap) {
  const auto start = std::chrono::steady_clock::now();
  const SimContext ctx = compile_query(q, fed);
  SimulatedOptimal best;
  std::vector<Row> rows{Row{}};
  BindingSet exposed_before;
  for (const QuerySegment &segment : q.segments) {
    const int n = static_cast<int>(segment.services.size());
    if (n > exhaustive_cap) throw ExhaustiveCapExceeded(n, exhaustive_cap);
    std::optional<SegmentOutcome> chosen;
    std::vector<int> chosen_order;
    long best_calls = 0;
    long best_sizes = 0;
    for (const std::vector<int> &order : valid_orderings(segment, exposed_before)) {
      SegmentOutcome outcome = run_segment(ctx, segment, order, rows);
      long calls = 0;
      for (const ServiceCalls &c : outcome.calls) calls += c.calls;
      long sizes = 0;
      for (int size : outcome.sizes) sizes += size;
      if (!chosen || calls < best_calls || (calls == best_calls && sizes < best_sizes)) {
        chosen = std::move(outcome);
        chosen_order = order;
        best_calls = calls;
        best_sizes = sizes;
      }
    }
    rows = std::move(chosen->rows);
    best.orders.push_back(std::move(chosen_order));
    append_outcome(best.result, *chosen);
    for (const ServicePattern &s : segment.services) {
      const BindingSet exposed = exposed_variables(s);
      exposed_before.insert(exposed.begin(), exposed.end());
    }
  }
  best.result.solutions = strip_rows(std::move(rows));
  best.result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

}  // namespace fedopt
