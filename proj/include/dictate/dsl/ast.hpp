#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dictate::dsl {

// One node of a program. Calls carry a registered head and arguments;
// literals are leaves. String literals hold UTF-8.
struct Expr {
  enum class Kind { call, string, integer };

  Kind kind = Kind::call;
  std::string head;
  std::string text;
  std::int64_t number = 0;
  std::vector<Expr> args;
  // Byte offset in the source this node was parsed from; not part of equality.
  std::size_t offset = 0;

  static Expr call(std::string head, std::vector<Expr> args = {});
  static Expr string(std::string text);
  static Expr integer(std::int64_t value);

  bool is_call() const { return kind == Kind::call; }
  bool is_call(std::string_view h) const { return kind == Kind::call && head == h; }

  friend bool operator==(const Expr& a, const Expr& b);
};

struct Program {
  Expr root;
  friend bool operator==(const Program& a, const Program& b) { return a.root == b.root; }
};

Program parse_program(std::string_view source);
// Parses a single expression of any category (used for constraints in tools and tests).
Expr parse_expr(std::string_view source);

// Throws ParseError when the tree violates the registry (unknown head, arity,
// argument category, non-positive index).
void validate(const Expr& e);
void validate(const Program& p);

// Canonical rendering: "(head arg ...)" with single spaces, double-quoted
// literals escaping '"', '\\', newline and tab.
std::string print(const Expr& e);
std::string print_canonical(const Program& p);

bool program_match(const Program& a, const Program& b);

}  // namespace dictate::dsl
