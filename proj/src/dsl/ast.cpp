#include "dictate/dsl/ast.hpp"

#include "dictate/dsl/registry.hpp"
#include "dictate/errors.hpp"

namespace dictate::dsl {

Expr Expr::call(std::string head, std::vector<Expr> args) {
  Expr e;
  e.kind = Kind::call;
  e.head = std::move(head);
  e.args = std::move(args);
  return e;
}

Expr Expr::string(std::string text) {
  Expr e;
  e.kind = Kind::string;
  e.text = std::move(text);
  return e;
}

Expr Expr::integer(std::int64_t value) {
  Expr e;
  e.kind = Kind::integer;
  e.number = value;
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::string: return a.text == b.text;
    case Expr::Kind::integer: return a.number == b.number;
    case Expr::Kind::call: return a.head == b.head && a.args == b.args;
  }
  return false;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_top() {
    skip_space();
    Expr e = parse_expr();
    skip_space();
    if (pos_ != src_.size()) throw ParseError(pos_, "unexpected trailing input");
    return e;
  }

 private:
  Expr parse_expr() {
    if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
    char c = src_[pos_];
    if (c == '(') return parse_call();
    if (c == '"') return parse_string();
    if (c == '-' || (c >= '0' && c <= '9')) return parse_integer();
    if (c == ')') throw ParseError(pos_, "unbalanced ')'");
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  Expr parse_call() {
    std::size_t open = pos_++;
    skip_space();
    std::size_t head_at = pos_;
    std::string head;
    while (pos_ < src_.size() && is_ident(src_[pos_], head.empty())) head.push_back(src_[pos_++]);
    if (head.empty()) {
      if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
      throw ParseError(pos_, "expected head identifier");
    }
    if (lookup(head) == nullptr) throw ParseError(head_at, "unknown head '" + head + "'");
    Expr e = Expr::call(std::move(head));
    e.offset = open;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input, unbalanced '('");
      if (src_[pos_] == ')') {
        ++pos_;
        break;
      }
      e.args.push_back(parse_expr());
    }
    return e;
  }

  Expr parse_string() {
    std::size_t open = pos_++;
    std::string out;
    for (;;) {
      if (pos_ >= src_.size()) throw ParseError(pos_, "unterminated string literal");
      char c = src_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= src_.size()) throw ParseError(pos_, "unterminated escape");
        char esc = src_[pos_++];
        switch (esc) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: throw ParseError(pos_ - 2, std::string("unknown escape '\\") + esc + "'");
        }
      } else {
        out.push_back(c);
      }
    }
    Expr e = Expr::string(std::move(out));
    e.offset = open;
    return e;
  }

  Expr parse_integer() {
    std::size_t start = pos_;
    if (src_[pos_] == '-') ++pos_;
    std::size_t digits = pos_;
    while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
    if (pos_ == digits) throw ParseError(start, "malformed integer");
    if (pos_ < src_.size() && is_ident(src_[pos_], false)) throw ParseError(start, "malformed integer");
    Expr e;
    try {
      e = Expr::integer(std::stoll(std::string(src_.substr(start, pos_ - start))));
    } catch (const std::out_of_range&) {
      throw ParseError(start, "integer out of range");
    }
    e.offset = start;
    return e;
  }

  void skip_space() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\n' || src_[pos_] == '\t' || src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  static bool is_ident(char c, bool first) {
    bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    return first ? alpha : (alpha || (c >= '0' && c <= '9') || c == '_');
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

ArgKind kind_of(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::string: return ArgKind::string;
    case Expr::Kind::integer: return ArgKind::integer;
    case Expr::Kind::call: break;
  }
  const HeadInfo* info = lookup(e.head);
  if (info == nullptr) throw ParseError(e.offset, "unknown head '" + e.head + "'");
  switch (info->category) {
    case Category::action: return ArgKind::action;
    case Category::target: return ArgKind::target;
    case Category::constraint: return ArgKind::constraint;
  }
  return ArgKind::action;
}

std::string describe(const HeadInfo& info) {
  std::string out = "(" + std::string(info.name);
  for (const auto& a : info.signature) {
    out += " ";
    out += to_string(a.kind);
    switch (a.multiplicity) {
      case Multiplicity::one: break;
      case Multiplicity::optional: out += "?"; break;
      case Multiplicity::zero_or_more: out += "*"; break;
      case Multiplicity::one_or_more: out += "+"; break;
    }
  }
  return out + ")";
}

void check_signature(const Expr& e, const HeadInfo& info) {
  std::size_t next = 0;
  auto fail = [&] { throw ParseError(e.offset, "arity mismatch: expected " + describe(info)); };
  for (const auto& spec : info.signature) {
    auto matches = [&] { return next < e.args.size() && kind_of(e.args[next]) == spec.kind; };
    switch (spec.multiplicity) {
      case Multiplicity::one:
        if (!matches()) fail();
        ++next;
        break;
      case Multiplicity::optional:
        if (matches()) ++next;
        break;
      case Multiplicity::zero_or_more:
        while (matches()) ++next;
        break;
      case Multiplicity::one_or_more:
        if (!matches()) fail();
        while (matches()) ++next;
        break;
    }
  }
  if (next != e.args.size()) fail();
}

void validate_rec(const Expr& e) {
  if (!e.is_call()) return;
  const HeadInfo* info = lookup(e.head);
  if (info == nullptr) throw ParseError(e.offset, "unknown head '" + e.head + "'");
  check_signature(e, *info);
  for (const auto& a : e.args) {
    if (a.kind == Expr::Kind::integer && a.number < 1) {
      throw ParseError(a.offset, "index must be >= 1 in " + e.head);
    }
    validate_rec(a);
  }
}

void print_string(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
}

void print_rec(std::string& out, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::string: print_string(out, e.text); return;
    case Expr::Kind::integer: out += std::to_string(e.number); return;
    case Expr::Kind::call: break;
  }
  out.push_back('(');
  out += e.head;
  for (const auto& a : e.args) {
    out.push_back(' ');
    print_rec(out, a);
  }
  out.push_back(')');
}

}  // namespace

Expr parse_expr(std::string_view source) {
  Expr e = Parser(source).parse_top();
  validate(e);
  return e;
}

Program parse_program(std::string_view source) {
  Program p{Parser(source).parse_top()};
  validate(p);
  return p;
}

void validate(const Expr& e) { validate_rec(e); }

void validate(const Program& p) {
  if (!p.root.is_call() || kind_of(p.root) != ArgKind::action) {
    throw ParseError(p.root.offset, "program root must be an action");
  }
  validate_rec(p.root);
}

std::string print(const Expr& e) {
  std::string out;
  print_rec(out, e);
  return out;
}

std::string print_canonical(const Program& p) { return print(p.root); }

bool program_match(const Program& a, const Program& b) { return print_canonical(a) == print_canonical(b); }

}  // namespace dictate::dsl
