#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shapdb/database.hpp"
#include "shapdb/error.hpp"
#include "shapdb/fd.hpp"
#include "shapdb/query.hpp"

namespace shapdb {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops everything from the first unquoted `#` (or `%` when allowed).
inline std::string_view strip_comment(std::string_view line, bool percent = false) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#' || (percent && c == '%')) {
      return line.substr(0, i);
    }
  }
  return line;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

struct Token {
  enum class Kind { identifier, number, quoted, symbol, end };
  Kind kind = Kind::end;
  std::string text;
};

// Tokenizer for a single line of query text.
class Lexer {
 public:
  Lexer(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

  Token next() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ >= s_.size()) return {Token::Kind::end, ""};
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t b = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      return {Token::Kind::identifier, std::string(s_.substr(b, pos_ - b))};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      std::size_t b = pos_++;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                  s_[pos_] == '_')) {
        // a trailing '.' terminates the rule rather than continuing the number
        if (s_[pos_] == '.' && (pos_ + 1 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))))
          break;
        ++pos_;
      }
      return {Token::Kind::number, std::string(s_.substr(b, pos_ - b))};
    }
    if (c == '"' || c == '\'') {
      auto close = s_.find(c, pos_ + 1);
      if (close == std::string_view::npos) throw ParseError(line_, "unterminated string");
      Token t{Token::Kind::quoted, std::string(s_.substr(pos_ + 1, close - pos_ - 1))};
      pos_ = close + 1;
      return t;
    }
    if (c == ':' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '-') {
      pos_ += 2;
      return {Token::Kind::symbol, ":-"};
    }
    if (c == '(' || c == ')' || c == ',' || c == '.') {
      ++pos_;
      return {Token::Kind::symbol, std::string(1, c)};
    }
    throw ParseError(line_, std::string("unexpected character '") + c + "'");
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

inline std::string unquote(std::string_view v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
    return std::string(v.substr(1, v.size() - 2));
  return std::string(v);
}

}  // namespace detail

// Fact file: one fact per line, `endo R(v1,...,vk)` or `exo R(v1,...,vk)`;
// `#` starts a comment. Fact ids are assigned 1, 2, ... in file order.
inline Database parse_database(std::string_view text) {
  Database db;
  auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    auto line = detail::trim(detail::strip_comment(lines[n]));
    if (line.empty()) continue;

    auto space = line.find_first_of(" \t");
    if (space == std::string_view::npos) throw ParseError(line_no, "expected 'endo' or 'exo' before the fact");
    auto flag = line.substr(0, space);
    Provenance prov;
    if (flag == "endo") prov = Provenance::endogenous;
    else if (flag == "exo") prov = Provenance::exogenous;
    else throw ParseError(line_no, "expected 'endo' or 'exo', got '" + std::string(flag) + "'");

    auto body = detail::trim(line.substr(space));
    auto open = body.find('(');
    if (open == std::string_view::npos || body.back() != ')') throw ParseError(line_no, "malformed fact");
    auto relation = detail::trim(body.substr(0, open));
    if (!detail::is_identifier(relation)) throw ParseError(line_no, "invalid relation name");

    std::vector<Value> values;
    auto args = body.substr(open + 1, body.size() - open - 2);
    if (!detail::trim(args).empty()) {
      char quote = 0;
      std::size_t start = 0;
      for (std::size_t i = 0; i <= args.size(); ++i) {
        if (i < args.size() && quote) {
          if (args[i] == quote) quote = 0;
          continue;
        }
        if (i < args.size() && (args[i] == '"' || args[i] == '\'')) {
          quote = args[i];
          continue;
        }
        if (i == args.size() || args[i] == ',') {
          auto v = detail::trim(args.substr(start, i - start));
          if (v.empty()) throw ParseError(line_no, "empty value");
          if (v.find_first_of("()") != std::string_view::npos) throw ParseError(line_no, "malformed fact");
          values.push_back(detail::unquote(v));
          start = i + 1;
        }
      }
      if (quote) throw ParseError(line_no, "unterminated string");
    }
    try {
      db.add(std::string(relation), std::move(values), prov);
    } catch (const PreconditionError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return db;
}

// Query file: datalog-style rules `q() :- R(x,y), S(x).`, one or more per
// file, each with the same Boolean head. Identifiers are variables, `_` is
// anonymous, numbers and quoted strings are constants. `#` and `%` comment.
inline UCQ parse_query(std::string_view text) {
  UCQ ucq;
  std::optional<std::string> head_name;
  std::map<std::string, std::size_t> arity;
  std::size_t anonymous = 0;

  auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    detail::Lexer lex(detail::strip_comment(lines[n], true), line_no);
    auto tok = lex.next();
    while (tok.kind != detail::Token::Kind::end) {
      auto expect = [&](const char* sym) {
        if (tok.kind != detail::Token::Kind::symbol || tok.text != sym)
          throw ParseError(line_no, std::string("expected '") + sym + "', got '" + tok.text + "'");
        tok = lex.next();
      };

      if (tok.kind != detail::Token::Kind::identifier) throw ParseError(line_no, "expected rule head");
      if (head_name && *head_name != tok.text)
        throw ParseError(line_no, "all rules must share the head " + *head_name + "()");
      head_name = tok.text;
      tok = lex.next();
      expect("(");
      if (!(tok.kind == detail::Token::Kind::symbol && tok.text == ")"))
        throw ParseError(line_no, "only Boolean queries accepted (head must be " + *head_name + "())");
      tok = lex.next();
      expect(":-");

      CQ cq;
      while (true) {
        if (tok.kind != detail::Token::Kind::identifier) throw ParseError(line_no, "expected atom");
        Atom atom{tok.text, {}};
        tok = lex.next();
        expect("(");
        if (!(tok.kind == detail::Token::Kind::symbol && tok.text == ")")) {
          while (true) {
            switch (tok.kind) {
              case detail::Token::Kind::identifier:
                if (tok.text == "_") atom.terms.push_back(Term::variable("_" + std::to_string(++anonymous)));
                else atom.terms.push_back(Term::variable(tok.text));
                break;
              case detail::Token::Kind::number:
              case detail::Token::Kind::quoted:
                atom.terms.push_back(Term::constant(tok.text));
                break;
              default:
                throw ParseError(line_no, "expected term, got '" + tok.text + "'");
            }
            tok = lex.next();
            if (tok.kind == detail::Token::Kind::symbol && tok.text == ",") {
              tok = lex.next();
              continue;
            }
            break;
          }
        }
        expect(")");
        auto [it, inserted] = arity.try_emplace(atom.relation, atom.terms.size());
        if (!inserted && it->second != atom.terms.size())
          throw ParseError(line_no, "arity conflict for relation " + atom.relation);
        cq.atoms.push_back(std::move(atom));
        if (tok.kind == detail::Token::Kind::symbol && tok.text == ",") {
          tok = lex.next();
          continue;
        }
        break;
      }
      if (tok.kind == detail::Token::Kind::symbol && tok.text == ".") tok = lex.next();
      else if (tok.kind != detail::Token::Kind::end) throw ParseError(line_no, "unexpected '" + tok.text + "'");
      ucq.disjuncts.push_back(std::move(cq));
    }
  }
  if (ucq.disjuncts.empty()) throw ParseError(0, "query file contains no rules");
  return ucq;
}

namespace detail {

inline std::optional<std::size_t> attribute_position(std::string_view name, const RelationSchema* rel) {
  if (rel) return rel->attribute_index(name);
  if (name.size() == 1 && name[0] >= 'A' && name[0] <= 'Z') return static_cast<std::size_t>(name[0] - 'A');
  if (!name.empty() && std::all_of(name.begin(), name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    std::size_t pos = std::stoul(std::string(name));
    if (pos >= 1) return pos - 1;
  }
  return std::nullopt;
}

}  // namespace detail

// FD file: lines `R: A B -> C D` (commas between attributes also accepted).
// Attributes are positional names (A, B, ...) or 1-based column numbers. When
// a schema is supplied, attributes of known relations are range-checked.
inline std::vector<FD> parse_fds(std::string_view text, const Schema* schema = nullptr) {
  std::vector<FD> fds;
  auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    auto line = detail::trim(detail::strip_comment(lines[n]));
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(line_no, "expected 'R: X -> Y'");
    auto arrow = line.find("->", colon);
    if (arrow == std::string_view::npos) throw ParseError(line_no, "expected '->'");
    auto relation = detail::trim(line.substr(0, colon));
    if (!detail::is_identifier(relation)) throw ParseError(line_no, "invalid relation name");
    const RelationSchema* rel = schema ? schema->find(std::string(relation)) : nullptr;

    auto attrs = [&](std::string_view part) {
      std::set<std::size_t> out;
      std::string buf(part);
      for (auto& c : buf)
        if (c == ',') c = ' ';
      std::istringstream in(buf);
      std::string name;
      while (in >> name) {
        auto pos = detail::attribute_position(name, rel);
        if (!pos) throw ParseError(line_no, "attribute " + name + " not in schema of relation " + std::string(relation));
        out.insert(*pos);
      }
      return std::vector<std::size_t>(out.begin(), out.end());
    };

    FD fd{std::string(relation), attrs(line.substr(colon + 1, arrow - colon - 1)), attrs(line.substr(arrow + 2))};
    if (fd.rhs.empty()) throw ParseError(line_no, "empty right-hand side");
    fds.push_back(std::move(fd));
  }
  return fds;
}

}  // namespace shapdb
