// Lexer, recursive-descent parser and canonical printer for the ProbLog
// fragment: facts, annotated disjunctions, rules with `not`, evidence/1,2 and
// query/1. `%` starts a line comment.

#include <cctype>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "bayesqa/error.hpp"
#include "bayesqa/problog.hpp"

namespace bayesqa::problog {

namespace {

enum class Tok {
  Name,      // lowercase identifier
  Variable,  // capitalized identifier or _
  Quoted,    // 'text'
  Number,
  LParen,
  RParen,
  Comma,
  Semicolon,
  Dot,
  DoubleColon,
  Neck,     // :-
  NotSign,  // \+
  End,
};

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::Name: return "identifier";
    case Tok::Variable: return "variable";
    case Tok::Quoted: return "quoted constant";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Semicolon: return "';'";
    case Tok::Dot: return "'.'";
    case Tok::DoubleColon: return "'::'";
    case Tok::Neck: return "':-'";
    case Tok::NotSign: return "'\\+'";
    case Tok::End: return "end of input";
  }
  return "token";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::islower(static_cast<unsigned char>(c))) {
        t.kind = Tok::Name;
        t.text = take_identifier();
      } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Variable;
        t.text = take_identifier();
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        t.kind = Tok::Number;
        t.text = take_number();
      } else if (c == '\'' || c == '"') {
        t.kind = Tok::Quoted;
        t.text = take_quoted(t, c);
      } else if (c == ':' && peek(1) == '-') {
        t.kind = Tok::Neck;
        advance(2);
      } else if (c == ':' && peek(1) == ':') {
        t.kind = Tok::DoubleColon;
        advance(2);
      } else if (c == '\\' && peek(1) == '+') {
        t.kind = Tok::NotSign;
        advance(2);
      } else {
        switch (c) {
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case ',': t.kind = Tok::Comma; break;
          case ';': t.kind = Tok::Semicolon; break;
          case '.': t.kind = Tok::Dot; break;
          default:
            throw Error(ErrorKind::SyntaxError,
                        fmt::format("line {}, column {}: unexpected character '{}'", line_, column_, c));
        }
        advance(1);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
      if (src_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
    }
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
      } else {
        return;
      }
    }
  }

  std::string take_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      advance(1);
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string take_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance(1);
    };
    digits();
    // A '.' is a fraction only when a digit follows; otherwise it ends the statement.
    if (peek(0) == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      advance(1);
      digits();
    }
    if ((peek(0) == 'e' || peek(0) == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '-' || peek(1) == '+') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      advance(2);
      digits();
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  // 'text' or "text"; the quote is escaped by doubling it or by a backslash.
  std::string take_quoted(const Token& at, char quote) {
    advance(1);
    std::string out;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\\' && pos_ + 1 < src_.size()) {
        out.push_back(src_[pos_ + 1]);
        advance(2);
      } else if (c == quote && peek(1) == quote) {
        out.push_back(quote);
        advance(2);
      } else if (c == quote) {
        advance(1);
        return out;
      } else if (c == '\n') {
        break;
      } else {
        out.push_back(c);
        advance(1);
      }
    }
    throw Error(ErrorKind::SyntaxError,
                fmt::format("line {}, column {}: unterminated quoted constant", at.line, at.column));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program run() {
    Program program;
    while (cur().kind != Tok::End) statement(program);
    return program;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& ahead(std::size_t n) const { return toks_[std::min(i_ + n, toks_.size() - 1)]; }

  [[noreturn]] void fail(std::string_view expected) const {
    const Token& t = cur();
    std::string found(describe(t.kind));
    if (!t.text.empty()) found += fmt::format(" '{}'", t.text);
    throw Error(ErrorKind::SyntaxError,
                fmt::format("line {}, column {}: expected {}, found {}", t.line, t.column, expected, found));
  }

  Token expect(Tok kind, std::string_view expected) {
    if (cur().kind != kind) fail(expected);
    return toks_[i_++];
  }

  bool accept(Tok kind) {
    if (cur().kind != kind) return false;
    ++i_;
    return true;
  }

  void statement(Program& program) {
    if (cur().kind == Tok::Name && ahead(1).kind == Tok::LParen &&
        (cur().text == "query" || cur().text == "evidence")) {
      const bool is_query = cur().text == "query";
      i_ += 2;
      Atom atom = parse_atom();
      if (is_query) {
        expect(Tok::RParen, "')' closing query/1");
        expect(Tok::Dot, "'.' ending the statement");
        program.queries.push_back(std::move(atom));
        return;
      }
      bool value = true;
      if (accept(Tok::Comma)) {
        const Token t = expect(Tok::Name, "true or false");
        if (t.text == "true") value = true;
        else if (t.text == "false") value = false;
        else {
          --i_;
          fail("true or false");
        }
      }
      expect(Tok::RParen, "')' closing evidence/2");
      expect(Tok::Dot, "'.' ending the statement");
      program.evidence.push_back({std::move(atom), value});
      return;
    }

    Clause clause;
    do {
      clause.heads.push_back(parse_head());
    } while (accept(Tok::Semicolon));
    if (accept(Tok::Neck)) {
      do {
        clause.body.push_back(parse_literal());
      } while (accept(Tok::Comma));
    }
    expect(Tok::Dot, clause.body.empty() ? "'.', ';' or ':-'" : "'.' or ','");
    program.clauses.push_back(std::move(clause));
  }

  ProbHead parse_head() {
    ProbHead head;
    if (cur().kind == Tok::Number) {
      const Token t = toks_[i_++];
      head.probability = to_double(t);
      expect(Tok::DoubleColon, "'::' after a probability");
    }
    head.atom = parse_atom();
    return head;
  }

  Literal parse_literal() {
    Literal lit;
    if (accept(Tok::NotSign)) {
      lit.negated = true;
    } else if (cur().kind == Tok::Name && cur().text == "not" &&
               (ahead(1).kind == Tok::Name || ahead(1).kind == Tok::LParen)) {
      ++i_;
      lit.negated = true;
    }
    if (lit.negated && accept(Tok::LParen)) {
      lit.atom = parse_atom();
      expect(Tok::RParen, "')' closing not(...)");
      return lit;
    }
    lit.atom = parse_atom();
    return lit;
  }

  Atom parse_atom() {
    Atom atom;
    atom.predicate = expect(Tok::Name, "a predicate name").text;
    if (accept(Tok::LParen)) {
      do {
        atom.args.push_back(parse_term());
      } while (accept(Tok::Comma));
      expect(Tok::RParen, "')' or ','");
    }
    return atom;
  }

  Term parse_term() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::Name:
      case Tok::Quoted:
      case Tok::Number:
        ++i_;
        return Term::constant(t.text);
      case Tok::Variable:
        ++i_;
        return Term{Term::Kind::Variable, t.text};
      default:
        fail("a constant or variable");
    }
  }

  static double to_double(const Token& t) {
    double value = 0.0;
    const auto* first = t.text.data();
    const auto* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw Error(ErrorKind::SyntaxError,
                  fmt::format("line {}, column {}: bad number '{}'", t.line, t.column, t.text));
    }
    return value;
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

bool is_bare_name(std::string_view s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

bool is_number_literal(std::string_view s) {
  if (s.empty() || !std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  bool dot = false;
  for (char c : s) {
    if (c == '.' && !dot) dot = true;
    else if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return s.back() != '.';
}

std::string render_atom(const Atom& atom, std::string_view separator) {
  std::string out = atom.predicate;
  if (atom.args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (i) out += separator;
    const Term& t = atom.args[i];
    out += t.kind == Term::Kind::Variable ? t.name : render_constant(t.name);
  }
  out += ')';
  return out;
}

}  // namespace

bool Atom::ground() const {
  for (const auto& t : args) {
    if (t.kind == Term::Kind::Variable) return false;
  }
  return true;
}

Atom make_atom(std::string predicate, std::vector<std::string> constants) {
  Atom atom{std::move(predicate), {}};
  for (auto& c : constants) atom.args.push_back(Term::constant(std::move(c)));
  return atom;
}

std::string render_constant(std::string_view value) {
  if (is_bare_name(value) || is_number_literal(value)) return std::string(value);
  std::string out = "'";
  for (char c : value) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

std::string to_string(const Atom& atom) { return render_atom(atom, ", "); }
std::string to_compact_string(const Atom& atom) { return render_atom(atom, ","); }

double Clause::head_mass() const {
  double sum = 0.0;
  for (const auto& h : heads) sum += h.probability;
  return sum;
}

Program parse(std::string_view text) { return Parser(Lexer(text).run()).run(); }

std::string format_probability(double p) {
  std::string s = fmt::format("{:.6f}", p);
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

std::string serialize(const Program& program) {
  std::vector<std::string> statements;
  for (const auto& clause : program.clauses) {
    std::string s;
    for (std::size_t i = 0; i < clause.heads.size(); ++i) {
      if (i) s += "; ";
      s += format_probability(clause.heads[i].probability) + "::" + to_string(clause.heads[i].atom);
    }
    if (!clause.body.empty()) {
      s += " :- ";
      for (std::size_t i = 0; i < clause.body.size(); ++i) {
        if (i) s += ", ";
        if (clause.body[i].negated) s += "not ";
        s += to_string(clause.body[i].atom);
      }
    }
    s += '.';
    statements.push_back(std::move(s));
  }
  for (const auto& e : program.evidence) {
    statements.push_back(fmt::format("evidence({}, {}).", to_string(e.atom), e.value ? "true" : "false"));
  }
  for (const auto& q : program.queries) statements.push_back(fmt::format("query({}).", to_string(q)));

  std::string out;
  for (std::size_t i = 0; i < statements.size(); ++i) {
    if (i) out += "\n";
    out += statements[i];
    out += "\n";
  }
  return out;
}

std::vector<std::string> check_probabilities(const Program& program) {
  std::vector<std::string> problems;
  for (std::size_t c = 0; c < program.clauses.size(); ++c) {
    const auto& clause = program.clauses[c];
    for (const auto& h : clause.heads) {
      if (!(h.probability >= 0.0 && h.probability <= 1.0)) {
        problems.push_back(fmt::format("clause {}: probability {} of {} outside [0,1]", c, h.probability,
                                       to_string(h.atom)));
      }
    }
    const double mass = clause.head_mass();
    if (mass > 1.0 + 1e-6) {
      problems.push_back(fmt::format("clause {}: head probabilities sum to {:.6g} > 1", c, mass));
    }
  }
  return problems;
}

}  // namespace bayesqa::problog
