#ifndef CYCLIND_TEXT_HPP
#define CYCLIND_TEXT_HPP

#include <stdexcept>
#include <string>

#include "cyclind/defs.hpp"
#include "cyclind/syntax.hpp"

namespace cyclind {

struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(std::size_t off, const std::string& msg)
      : std::runtime_error("syntax error at offset " + std::to_string(off) + ": " + msg),
        offset(off) {}
};

// Character-level cursor shared by the formula, definition and proof parsers.
class Cursor {
 public:
  explicit Cursor(const std::string& src) : src_(src) {}

  void skip_ws(bool newlines = true);
  bool eof();
  char peek();
  char get();
  bool try_consume(const std::string& tok);   // punctuation; no identifier-boundary check
  bool try_keyword(const std::string& word);  // identifier with boundary check
  void expect(const std::string& tok);
  std::string ident();           // [A-Za-z_$][A-Za-z0-9_$]* followed by quotes
  long long integer();
  std::size_t pos() const { return i_; }
  // Offsets are reported 1-based.
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(i_ + 1, msg); }
  std::string rest_of_line();

 private:
  const std::string& src_;
  std::size_t i_ = 0;
};

Term parse_term(Cursor& c);
Formula parse_formula(Cursor& c);
Sequent parse_sequent(Cursor& c);

Term parse_term(const std::string& s);
Formula parse_formula(const std::string& s);
Sequent parse_sequent(const std::string& s);

std::string to_string(const Term& t);
std::string to_string(const Formula& f);
std::string to_string(const Sequent& s);

DefinitionSet parse_defs(const std::string& src);
std::string to_string(const DefinitionSet& d);

}  // namespace cyclind

#endif
