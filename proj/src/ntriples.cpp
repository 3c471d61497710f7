#include "fedopt/ntriples.hpp"

#include <cctype>

namespace fedopt {

namespace {

bool is_blank_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class LineScanner {
 public:
  LineScanner(const std::string &line, int number) : line_(line), number_(number) {}

  void skip_space() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_space();
    return pos_ >= line_.size() || line_[pos_] == '#';
  }

  char peek() const { return pos_ < line_.size() ? line_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string &message) const {
    throw NTriplesError(number_, message);
  }

  std::string iri() {
    const size_t begin = pos_;
    ++pos_;
    while (pos_ < line_.size() && line_[pos_] != '>') {
      if (line_[pos_] == ' ' || line_[pos_] == '<') fail("malformed IRI");
      ++pos_;
    }
    if (pos_ >= line_.size()) fail("unterminated IRI");
    ++pos_;
    return line_.substr(begin, pos_ - begin);
  }

  std::string blank() {
    const size_t begin = pos_;
    pos_ += 2;
    if (pos_ >= line_.size() || !is_blank_name_char(line_[pos_])) fail("malformed blank node label");
    while (pos_ < line_.size() && is_blank_name_char(line_[pos_])) ++pos_;
    return line_.substr(begin, pos_ - begin);
  }

  std::string literal() {
    const size_t begin = pos_;
    ++pos_;
    while (pos_ < line_.size() && line_[pos_] != '"') {
      if (line_[pos_] == '\\') ++pos_;
      ++pos_;
    }
    if (pos_ >= line_.size()) fail("unterminated literal");
    ++pos_;
    if (peek() == '@') {
      ++pos_;
      if (!std::isalpha(static_cast<unsigned char>(peek()))) fail("malformed language tag");
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-') ++pos_;
    } else if (peek() == '^') {
      ++pos_;
      if (peek() != '^') fail("malformed datatype marker");
      ++pos_;
      if (peek() != '<') fail("datatype must be an IRI");
      iri();
    }
    return line_.substr(begin, pos_ - begin);
  }

  std::string subject() {
    skip_space();
    if (peek() == '<') return iri();
    if (peek() == '_' && pos_ + 1 < line_.size() && line_[pos_ + 1] == ':') return blank();
    fail("subject must be an IRI or blank node");
  }

  std::string predicate() {
    skip_space();
    if (peek() == '<') return iri();
    fail("predicate must be an IRI");
  }

  std::string object() {
    skip_space();
    if (peek() == '<') return iri();
    if (peek() == '"') return literal();
    if (peek() == '_' && pos_ + 1 < line_.size() && line_[pos_ + 1] == ':') return blank();
    fail("object must be an IRI, literal, or blank node");
  }

  void terminator() {
    skip_space();
    if (peek() != '.') fail("missing terminating '.'");
    ++pos_;
    if (!at_end_or_comment()) fail("unexpected text after '.'");
  }

 private:
  const std::string &line_;
  int number_;
  size_t pos_ = 0;
};

}  // namespace

NTriplesError::NTriplesError(int line_, const std::string &message)
    : std::runtime_error("line " + std::to_string(line_) + ": " + message), line(line_) {}

std::vector<NTriple> parse_ntriples(const std::string &text) {
  std::vector<NTriple> triples;
  int number = 0;
  size_t begin = 0;
  while (begin <= text.size()) {
    size_t end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++number;
    LineScanner scanner(line, number);
    if (!scanner.at_end_or_comment()) {
      NTriple triple;
      triple.subject = scanner.subject();
      triple.predicate = scanner.predicate();
      triple.object = scanner.object();
      scanner.terminator();
      triples.push_back(std::move(triple));
    }
    if (end == text.size()) break;
    begin = end + 1;
  }
  return triples;
}

}  // namespace fedopt
