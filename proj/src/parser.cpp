#include "fedopt/parser.hpp"

#include <cctype>
#include <optional>
#include <sstream>
#include <string_view>

namespace fedopt {

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_pname_char(char c) { return is_name_char(c) || c == '-'; }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

std::string trim(std::string_view text) {
  size_t begin = 0;
  size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

// True when the '<' at `at` opens an IRI reference: some '>' follows on the
// same line with no whitespace or quote in between. Distinguishes IRIs from
// comparison operators inside FILTER bodies.
bool opens_iri(std::string_view text, size_t at) {
  for (size_t i = at + 1; i < text.size(); ++i) {
    char c = text[i];
    if (c == '>') return true;
    if (c == '\n' || c == ' ' || c == '\t' || c == '"' || c == '<') return false;
  }
  return false;
}

// Blanks out `# ...` comments (outside strings and IRIs) so that source
// offsets, lines and columns stay valid for verbatim span capture.
std::string strip_comments(const std::string &input) {
  std::string out = input;
  size_t i = 0;
  while (i < out.size()) {
    char c = out[i];
    if (c == '"') {
      ++i;
      while (i < out.size() && out[i] != '"' && out[i] != '\n') {
        if (out[i] == '\\' && i + 1 < out.size())
          i += 2;
        else
          ++i;
      }
      if (i < out.size()) ++i;
    } else if (c == '<' && opens_iri(out, i)) {
      while (i < out.size() && out[i] != '>') ++i;
    } else if (c == '#') {
      while (i < out.size() && out[i] != '\n') out[i++] = ' ';
    } else {
      ++i;
    }
  }
  return out;
}

enum class Tok {
  LBrace,
  RBrace,
  LParen,
  RParen,
  Dot,
  Semicolon,
  Comma,
  Star,
  Iri,
  PName,
  Var,
  Blank,
  Literal,
  Word,
  End
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
  size_t begin = 0;
  size_t end = 0;
  bool has_language_tag = false;
  bool has_datatype = false;
};

[[noreturn]] void fail(ParseError::Kind kind, int line, int column, const std::string &msg) {
  throw ParseError(kind, line, column, msg);
}

class Lexer {
 public:
  explicit Lexer(const std::string &source) : src_(source) {}

  const Token &peek() {
    if (!peeked_) peeked_ = scan();
    return *peeked_;
  }

  Token next() {
    if (peeked_) {
      Token t = std::move(*peeked_);
      peeked_.reset();
      return t;
    }
    return scan();
  }

  size_t cursor() const { return peeked_ ? peeked_->begin : pos_; }

  std::string_view raw(size_t begin, size_t end) const {
    return std::string_view(src_).substr(begin, end - begin);
  }

  size_t size() const { return src_.size(); }

  // Consumes raw text up to (and including) the next top-level occurrence of
  // `keyword`, skipping strings, IRIs and parenthesized groups. Returns the
  // trimmed span before the keyword.
  std::string capture_until_keyword(const char *keyword) {
    rewind_peek();
    const size_t start = pos_;
    const size_t klen = std::string_view(keyword).size();
    int depth = 0;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '"') {
        skip_string();
        continue;
      }
      if (c == '<' && opens_iri(src_, pos_)) {
        while (pos_ < src_.size() && src_[pos_] != '>') advance();
        if (pos_ < src_.size()) advance();
        continue;
      }
      if (c == '(') {
        ++depth;
        advance();
        continue;
      }
      if (c == ')') {
        --depth;
        advance();
        continue;
      }
      if (depth == 0 && std::isalpha(static_cast<unsigned char>(c)) &&
          pos_ + klen <= src_.size() && iequals(raw(pos_, pos_ + klen), keyword)) {
        const bool left_ok = pos_ == start || !is_name_char(src_[pos_ - 1]);
        const bool sigil = pos_ > 0 && (src_[pos_ - 1] == '?' || src_[pos_ - 1] == '$');
        const bool right_ok = pos_ + klen == src_.size() || !is_name_char(src_[pos_ + klen]);
        if (left_ok && !sigil && right_ok) {
          std::string span = trim(raw(start, pos_));
          for (size_t i = 0; i < klen; ++i) advance();
          return span;
        }
      }
      advance();
    }
    fail(ParseError::Kind::Syntax, line_, col_,
         std::string("expected ") + keyword + " clause");
  }

  // Consumes a balanced `( ... )` group and returns the trimmed inner text.
  std::string capture_parenthesized() {
    rewind_peek();
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    if (pos_ >= src_.size() || src_[pos_] != '(')
      fail(ParseError::Kind::Syntax, line_, col_, "expected '(' after FILTER");
    const int open_line = line_;
    const int open_col = col_;
    advance();
    const size_t start = pos_;
    int depth = 1;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '"') {
        skip_string();
        continue;
      }
      if (c == '<' && opens_iri(src_, pos_)) {
        while (pos_ < src_.size() && src_[pos_] != '>') advance();
        if (pos_ < src_.size()) advance();
        continue;
      }
      if (c == '(') ++depth;
      if (c == ')') {
        --depth;
        if (depth == 0) {
          std::string body = trim(raw(start, pos_));
          advance();
          return body;
        }
      }
      advance();
    }
    fail(ParseError::Kind::Syntax, open_line, open_col, "unterminated FILTER expression");
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_string() {
    advance();  // opening quote
    while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) advance();
      advance();
    }
    if (pos_ < src_.size() && src_[pos_] == '"') advance();
  }

  void rewind_peek() {
    if (!peeked_) return;
    pos_ = peeked_->begin;
    line_ = peeked_->line;
    col_ = peeked_->column;
    peeked_.reset();
  }

  Token scan() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    Token t;
    t.begin = pos_;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::End;
      t.end = pos_;
      return t;
    }
    const char c = src_[pos_];
    switch (c) {
      case '{': return single(t, Tok::LBrace);
      case '}': return single(t, Tok::RBrace);
      case '(': return single(t, Tok::LParen);
      case ')': return single(t, Tok::RParen);
      case ';': return single(t, Tok::Semicolon);
      case ',': return single(t, Tok::Comma);
      case '*': return single(t, Tok::Star);
      default: break;
    }
    if (c == '.') {
      // A dot starts a decimal only when directly followed by a digit.
      if (pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))
        return scan_number(t);
      return single(t, Tok::Dot);
    }
    if (c == '<') return scan_iri(t);
    if (c == '?' || c == '$') return scan_variable(t);
    if (c == '"') return scan_literal(t);
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '+' || c == '-') && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))))
      return scan_number(t);
    if (c == '_' && pos_ + 1 < src_.size() && src_[pos_ + 1] == ':') return scan_blank(t);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':')
      return scan_word_or_pname(t);
    fail(ParseError::Kind::Syntax, t.line, t.column,
         std::string("unexpected character '") + c + "'");
  }

  Token single(Token &t, Tok kind) {
    t.kind = kind;
    t.text = src_[pos_];
    advance();
    t.end = pos_;
    return t;
  }

  Token finish(Token &t, Tok kind) {
    t.kind = kind;
    t.end = pos_;
    t.text = std::string(raw(t.begin, t.end));
    return t;
  }

  Token scan_iri(Token &t) {
    advance();  // '<'
    while (pos_ < src_.size() && src_[pos_] != '>') {
      char c = src_[pos_];
      if (c == '\n' || c == ' ' || c == '\t' || c == '"' || c == '<')
        fail(ParseError::Kind::Syntax, t.line, t.column, "invalid character in IRI");
      advance();
    }
    if (pos_ >= src_.size())
      fail(ParseError::Kind::Syntax, t.line, t.column, "unterminated IRI");
    advance();  // '>'
    return finish(t, Tok::Iri);
  }

  Token scan_variable(Token &t) {
    advance();  // sigil
    size_t len = 0;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) {
      advance();
      ++len;
    }
    if (len == 0)
      fail(ParseError::Kind::Syntax, t.line, t.column, "variable name expected after sigil");
    return finish(t, Tok::Var);
  }

  Token scan_literal(Token &t) {
    advance();  // opening quote
    while (pos_ < src_.size() && src_[pos_] != '"') {
      if (src_[pos_] == '\n')
        fail(ParseError::Kind::Syntax, t.line, t.column, "unterminated string literal");
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) advance();
      advance();
    }
    if (pos_ >= src_.size())
      fail(ParseError::Kind::Syntax, t.line, t.column, "unterminated string literal");
    advance();  // closing quote
    if (pos_ < src_.size() && src_[pos_] == '@') {
      advance();
      size_t len = 0;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '-')) {
        advance();
        ++len;
      }
      if (len == 0)
        fail(ParseError::Kind::Syntax, t.line, t.column, "empty language tag");
      t.has_language_tag = true;
    } else if (pos_ + 1 < src_.size() && src_[pos_] == '^' && src_[pos_ + 1] == '^') {
      advance();
      advance();
      if (pos_ < src_.size() && src_[pos_] == '<') {
        Token dt;
        dt.begin = pos_;
        dt.line = line_;
        dt.column = col_;
        scan_iri(dt);
      } else {
        scan_pname_body(t.line, t.column);
      }
      t.has_datatype = true;
    }
    return finish(t, Tok::Literal);
  }

  Token scan_number(Token &t) {
    if (src_[pos_] == '+' || src_[pos_] == '-') advance();
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t mark = pos_;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      } else {
        // Not an exponent; rewind is safe because nothing consumed a newline.
        col_ -= static_cast<int>(pos_ - mark);
        pos_ = mark;
      }
    }
    return finish(t, Tok::Literal);
  }

  Token scan_blank(Token &t) {
    advance();  // '_'
    advance();  // ':'
    size_t len = 0;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) {
      advance();
      ++len;
    }
    if (len == 0)
      fail(ParseError::Kind::Syntax, t.line, t.column, "blank node label expected");
    return finish(t, Tok::Blank);
  }

  void scan_pname_body(int at_line, int at_col) {
    // Local part: name chars, '-' and interior dots.
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (is_pname_char(c)) {
        advance();
        continue;
      }
      if (c == '.' && pos_ + 1 < src_.size() && is_pname_char(src_[pos_ + 1])) {
        advance();
        continue;
      }
      break;
    }
    (void)at_line;
    (void)at_col;
  }

  Token scan_word_or_pname(Token &t) {
    if (src_[pos_] == ':') {
      advance();
      scan_pname_body(t.line, t.column);
      return finish(t, Tok::PName);
    }
    while (pos_ < src_.size() && is_pname_char(src_[pos_])) advance();
    if (pos_ < src_.size() && src_[pos_] == ':') {
      advance();
      scan_pname_body(t.line, t.column);
      return finish(t, Tok::PName);
    }
    finish(t, Tok::Word);
    if (t.text == "true" || t.text == "false") t.kind = Tok::Literal;
    return t;
  }

  const std::string &src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::optional<Token> peeked_;
};

class Parser {
 public:
  explicit Parser(const std::string &raw)
      : cleaned_(strip_comments(raw)), lex_(cleaned_) {}

  FederatedQuery parse() {
    FederatedQuery q;
    const Token select = consume_prologue();
    q.prologue = trim(lex_.raw(0, select.begin));
    q.projection = lex_.capture_until_keyword("WHERE");
    if (q.projection.empty())
      fail(ParseError::Kind::Syntax, select.line, select.column, "missing SELECT projection");
    const Token open = lex_.next();
    if (open.kind != Tok::LBrace)
      fail(ParseError::Kind::Syntax, open.line, open.column, "expected '{' after WHERE");

    int service_counter = 0;
    std::vector<ServicePattern> current;
    auto flush = [&] {
      if (!current.empty()) {
        q.segments.push_back({std::move(current), false});
        current.clear();
      }
    };
    size_t after_group = 0;
    while (true) {
      const Token &t = lex_.peek();
      if (t.kind == Tok::RBrace) {
        Token close = lex_.next();
        after_group = close.end;
        break;
      }
      if (t.kind == Tok::End)
        fail(ParseError::Kind::Syntax, t.line, t.column, "unexpected end of input inside WHERE group");
      if (t.kind == Tok::Word && iequals(t.text, "SERVICE")) {
        current.push_back(parse_service(service_counter++));
        continue;
      }
      if (t.kind == Tok::Word && iequals(t.text, "OPTIONAL")) {
        flush();
        q.segments.push_back(parse_optional(service_counter));
        continue;
      }
      if (t.kind == Tok::Word && iequals(t.text, "UNION"))
        fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column, "UNION is not supported");
      if (t.kind == Tok::LBrace)
        fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column,
             "nested group patterns are not supported");
      if (t.kind == Tok::Word && iequals(t.text, "FILTER"))
        fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column,
             "FILTER outside a SERVICE body is not supported");
      if (t.kind == Tok::Var || t.kind == Tok::Iri || t.kind == Tok::PName ||
          t.kind == Tok::Blank || t.kind == Tok::Literal || t.kind == Tok::Word)
        fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column,
             "triple patterns outside SERVICE blocks are not supported");
      fail(ParseError::Kind::Syntax, t.line, t.column, "unexpected token in WHERE group");
    }
    flush();
    if (q.segments.empty())
      fail(ParseError::Kind::Syntax, open.line, open.column, "query contains no SERVICE pattern");
    q.tail = trim(lex_.raw(after_group, lex_.size()));
    return q;
  }

 private:
  Token consume_prologue() {
    while (true) {
      const Token &t = lex_.peek();
      if (t.kind == Tok::End)
        fail(ParseError::Kind::Syntax, t.line, t.column, "expected SELECT");
      if (t.kind == Tok::Word && iequals(t.text, "SELECT")) return lex_.next();
      const bool prologue_token =
          (t.kind == Tok::Word && (iequals(t.text, "PREFIX") || iequals(t.text, "BASE"))) ||
          t.kind == Tok::PName || t.kind == Tok::Iri || t.kind == Tok::Dot;
      if (!prologue_token)
        fail(ParseError::Kind::Syntax, t.line, t.column, "unexpected token before SELECT");
      lex_.next();
    }
  }

  QuerySegment parse_optional(int &service_counter) {
    lex_.next();  // OPTIONAL
    const Token open = lex_.next();
    if (open.kind != Tok::LBrace)
      fail(ParseError::Kind::Syntax, open.line, open.column, "expected '{' after OPTIONAL");
    QuerySegment segment;
    segment.inside_optional = true;
    while (true) {
      const Token &t = lex_.peek();
      if (t.kind == Tok::RBrace) {
        lex_.next();
        break;
      }
      if (t.kind == Tok::End)
        fail(ParseError::Kind::Syntax, t.line, t.column, "unexpected end of input inside OPTIONAL");
      if (t.kind == Tok::Word && iequals(t.text, "SERVICE")) {
        segment.services.push_back(parse_service(service_counter++));
        continue;
      }
      if (t.kind == Tok::Word && iequals(t.text, "UNION"))
        fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column, "UNION is not supported");
      if (t.kind == Tok::LBrace)
        fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column,
             "nested group patterns are not supported");
      fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column,
           "only SERVICE blocks are supported inside OPTIONAL");
    }
    if (segment.services.empty())
      fail(ParseError::Kind::Syntax, open.line, open.column,
           "OPTIONAL group must contain at least one SERVICE");
    return segment;
  }

  ServicePattern parse_service(int index) {
    lex_.next();  // SERVICE
    ServicePattern s;
    s.original_index = index;
    if (lex_.peek().kind == Tok::Word && iequals(lex_.peek().text, "SILENT")) {
      lex_.next();
      s.silent = true;
    }
    const Token ep = lex_.next();
    switch (ep.kind) {
      case Tok::Iri: s.endpoint = Term::iri(ep.text); break;
      case Tok::PName: s.endpoint = Term::prefixed_name(ep.text); break;
      case Tok::Var: s.endpoint = Term::variable(ep.text); break;
      default:
        fail(ParseError::Kind::Syntax, ep.line, ep.column,
             "SERVICE endpoint must be an IRI, prefixed name or variable");
    }
    const Token open = lex_.next();
    if (open.kind != Tok::LBrace)
      fail(ParseError::Kind::Syntax, open.line, open.column, "expected '{' to open SERVICE body");

    if (lex_.peek().kind == Tok::Word && iequals(lex_.peek().text, "SELECT")) {
      lex_.next();
      BindingSet projection;
      while (lex_.peek().kind == Tok::Var) projection.insert(lex_.next().text.substr(1));
      if (projection.empty()) {
        const Token &t = lex_.peek();
        fail(ParseError::Kind::Syntax, t.line, t.column,
             "sub-SELECT requires an explicit variable list");
      }
      const Token where = lex_.next();
      if (!(where.kind == Tok::Word && iequals(where.text, "WHERE")))
        fail(ParseError::Kind::Syntax, where.line, where.column, "expected WHERE in sub-SELECT");
      const Token inner = lex_.next();
      if (inner.kind != Tok::LBrace)
        fail(ParseError::Kind::Syntax, inner.line, inner.column, "expected '{' after WHERE");
      parse_triples_block(s.triples, s.filter_bodies);
      expect_rbrace("expected '}' to close sub-SELECT");
      s.sub_projection = std::move(projection);
      expect_rbrace("expected '}' to close SERVICE body");
    } else {
      parse_triples_block(s.triples, s.filter_bodies);
      expect_rbrace("expected '}' to close SERVICE body");
    }
    if (s.triples.empty())
      fail(ParseError::Kind::Syntax, open.line, open.column,
           "SERVICE body must contain at least one triple pattern");
    return s;
  }

  void expect_rbrace(const char *msg) {
    const Token t = lex_.next();
    if (t.kind != Tok::RBrace) fail(ParseError::Kind::Syntax, t.line, t.column, msg);
  }

  void parse_triples_block(std::vector<TriplePattern> &triples,
                           std::vector<std::string> &filters) {
    while (true) {
      const Token &t = lex_.peek();
      if (t.kind == Tok::RBrace) return;
      if (t.kind == Tok::End)
        fail(ParseError::Kind::Syntax, t.line, t.column, "unexpected end of input in graph pattern");
      if (t.kind == Tok::LBrace)
        fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column,
             "nested group patterns are not supported");
      if (t.kind == Tok::Word) {
        if (iequals(t.text, "SERVICE"))
          fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column,
               "nested SERVICE blocks are not supported");
        if (iequals(t.text, "UNION"))
          fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column, "UNION is not supported");
        if (iequals(t.text, "OPTIONAL"))
          fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column,
               "OPTIONAL inside a SERVICE body is not supported");
        if (iequals(t.text, "FILTER")) {
          lex_.next();
          filters.push_back(lex_.capture_parenthesized());
          if (lex_.peek().kind == Tok::Dot) lex_.next();
          continue;
        }
      }
      const Term subject = parse_term(TriplePosition::Subject);
      while (true) {
        const Term predicate = parse_term(TriplePosition::Predicate);
        while (true) {
          const Term object = parse_term(TriplePosition::Object);
          triples.push_back({subject, predicate, object});
          if (lex_.peek().kind == Tok::Comma) {
            lex_.next();
            continue;
          }
          break;
        }
        if (lex_.peek().kind == Tok::Semicolon) {
          while (lex_.peek().kind == Tok::Semicolon) lex_.next();
          const Tok after = lex_.peek().kind;
          if (after == Tok::Dot || after == Tok::RBrace) break;  // trailing ';'
          continue;
        }
        break;
      }
      if (lex_.peek().kind == Tok::Dot) lex_.next();
    }
  }

  Term parse_term(TriplePosition role) {
    const Token t = lex_.next();
    switch (t.kind) {
      case Tok::Iri: return Term::iri(t.text);
      case Tok::PName: return Term::prefixed_name(t.text);
      case Tok::Var: return Term::variable(t.text);
      case Tok::Blank:
        if (role == TriplePosition::Predicate)
          fail(ParseError::Kind::Syntax, t.line, t.column, "blank node cannot be a predicate");
        return Term::blank_node(t.text);
      case Tok::Literal:
        if (role == TriplePosition::Subject)
          fail(ParseError::Kind::Syntax, t.line, t.column, "literal cannot be a subject");
        if (role == TriplePosition::Predicate)
          fail(ParseError::Kind::Syntax, t.line, t.column, "literal cannot be a predicate");
        return Term::literal(t.text, t.has_language_tag, t.has_datatype);
      case Tok::Word:
        if (t.text == "a") {
          if (role != TriplePosition::Predicate)
            fail(ParseError::Kind::Syntax, t.line, t.column,
                 "keyword 'a' is only valid as a predicate");
          return Term::keyword_a();
        }
        if (iequals(t.text, "SERVICE"))
          fail(ParseError::Kind::UnsupportedConstruct, t.line, t.column,
               "nested SERVICE blocks are not supported");
        fail(ParseError::Kind::Syntax, t.line, t.column,
             "unexpected token '" + t.text + "' in triple pattern");
      default:
        fail(ParseError::Kind::Syntax, t.line, t.column, "expected an RDF term");
    }
  }

  std::string cleaned_;
  Lexer lex_;
};

void write_triples_and_filters(std::ostringstream &out, const ServicePattern &s, int indent) {
  const std::string pad(indent, ' ');
  for (const auto &triple : s.triples)
    out << pad << triple.subject.lexical << ' ' << triple.predicate.lexical << ' '
        << triple.object.lexical << " .\n";
  for (const auto &body : s.filter_bodies) out << pad << "FILTER (" << body << ")\n";
}

void write_service(std::ostringstream &out, const ServicePattern &s, int indent) {
  const std::string pad(indent, ' ');
  out << pad << "SERVICE " << (s.silent ? "SILENT " : "") << s.endpoint.lexical << " {\n";
  if (s.sub_projection) {
    out << pad << "  SELECT";
    for (const auto &name : *s.sub_projection) out << " ?" << name;
    out << " WHERE {\n";
    write_triples_and_filters(out, s, indent + 4);
    out << pad << "  }\n";
  } else {
    write_triples_and_filters(out, s, indent + 2);
  }
  out << pad << "}\n";
}

}  // namespace

ParseError::ParseError(Kind kind, int line, int column, const std::string &message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      kind(kind),
      line(line),
      column(column),
      message(message) {}

FederatedQuery parse_query(const std::string &text) { return Parser(text).parse(); }

std::string serialize_query(const FederatedQuery &query) {
  std::ostringstream out;
  if (!query.prologue.empty()) out << query.prologue << "\n";
  out << "SELECT " << query.projection << "\nWHERE {\n";
  for (const auto &segment : query.segments) {
    if (segment.inside_optional) {
      out << "  OPTIONAL {\n";
      for (const auto &service : segment.services) write_service(out, service, 4);
      out << "  }\n";
    } else {
      for (const auto &service : segment.services) write_service(out, service, 2);
    }
  }
  out << "}";
  if (!query.tail.empty()) out << "\n" << query.tail;
  out << "\n";
  return out.str();
}

}  // namespace fedopt
