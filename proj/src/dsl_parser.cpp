#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "omtk/dsl.hpp"
#include "omtk/error.hpp"

namespace omtk::dsl {

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end, bad };

struct Token {
  Tok kind = Tok::end;
  std::size_t offset = 0;
  std::string_view text;
  double number = 0.0;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::end: return "end of input";
    case Tok::number: return "number '" + std::string(t.text) + "'";
    case Tok::ident: return "identifier '" + std::string(t.text) + "'";
    case Tok::bad: return "character '" + std::string(t.text) + "'";
    default: return "'" + std::string(t.text) + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    Token t;
    t.offset = pos_;
    if (pos_ >= src_.size()) return t;

    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
        ++end;
      }
      t.kind = Tok::ident;
      t.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return t;
    }
    t.text = src_.substr(pos_, 1);
    ++pos_;
    switch (c) {
      case '+': t.kind = Tok::plus; break;
      case '-': t.kind = Tok::minus; break;
      case '*': t.kind = Tok::star; break;
      case '/': t.kind = Tok::slash; break;
      case '^': t.kind = Tok::caret; break;
      case '(': t.kind = Tok::lparen; break;
      case ')': t.kind = Tok::rparen; break;
      default: t.kind = Tok::bad; break;
    }
    return t;
  }

 private:
  Token lex_number() {
    Token t;
    t.offset = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      const std::size_t start = end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      return end - start;
    };
    std::size_t count = digits();
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      count += digits();
    }
    if (count > 0 && end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t save = end;
      ++end;
      if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
      if (digits() == 0) end = save;
    }
    t.text = src_.substr(pos_, end - pos_);
    pos_ = end;
    if (count == 0) {
      t.kind = Tok::bad;
      return t;
    }
    double v = 0.0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || !std::isfinite(v)) {
      t.kind = Tok::bad;
      return t;
    }
    t.kind = Tok::number;
    t.number = v;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view src, Dims dims) : lex_(src), dims_(dims) { advance(); }

  Expr parse_all() {
    Expr e = parse_sum();
    if (cur_.kind != Tok::end) fail("operator or end of input");
    return e;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(cur_.offset, expected, describe(cur_));
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
      const NodeKind op = cur_.kind == Tok::plus ? NodeKind::add : NodeKind::sub;
      advance();
      lhs = Expr::binary(op, lhs, parse_product());
    }
    return lhs;
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
      const NodeKind op = cur_.kind == Tok::star ? NodeKind::mul : NodeKind::div;
      advance();
      lhs = Expr::binary(op, lhs, parse_unary());
    }
    return lhs;
  }

  Expr parse_unary() {
    if (cur_.kind == Tok::minus) {
      advance();
      return Expr::unary(NodeKind::neg, parse_unary());
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    while (cur_.kind == Tok::caret) {
      advance();
      bool negative = false;
      if (cur_.kind == Tok::minus) {
        negative = true;
        advance();
      }
      if (cur_.kind != Tok::number || cur_.text.find_first_of(".eE") != std::string_view::npos ||
          cur_.number > 1e6) {
        fail("integer exponent");
      }
      const int n = static_cast<int>(cur_.number) * (negative ? -1 : 1);
      if (n < 0 && usage(base).max_moment > 0) {
        fail("non-negative exponent for a moment expression");
      }
      advance();
      base = Expr::power(base, n);
    }
    return base;
  }

  Expr parse_atom() {
    switch (cur_.kind) {
      case Tok::number: {
        const double v = cur_.number;
        advance();
        return Expr::constant(v);
      }
      case Tok::lparen: {
        advance();
        Expr inner = parse_sum();
        if (cur_.kind != Tok::rparen) fail("')'");
        advance();
        return inner;
      }
      case Tok::ident: return parse_identifier();
      default: fail("number, variable, function or '('");
    }
  }

  Expr parse_identifier() {
    const std::string_view name = cur_.text;
    if (name == "t") {
      advance();
      return Expr::time();
    }
    for (auto [fname, kind] : {std::pair{"sin", NodeKind::sin},
                               std::pair{"cos", NodeKind::cos},
                               std::pair{"exp", NodeKind::exp},
                               std::pair{"tanh", NodeKind::tanh}}) {
      if (name == fname) {
        advance();
        if (cur_.kind != Tok::lparen) fail("'(' after function name");
        advance();
        Expr arg = parse_sum();
        if (cur_.kind != Tok::rparen) fail("')'");
        advance();
        return Expr::unary(kind, arg);
      }
    }
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'M')) {
      const std::string_view digits = name.substr(1);
      int idx = 0;
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
      if (res.ec == std::errc() && res.ptr == digits.data() + digits.size() &&
          digits[0] != '0') {
        if (name[0] == 'x') {
          if (idx < 1 || idx > dims_.state()) {
            fail("state variable x1..x" + std::to_string(dims_.state()));
          }
          advance();
          return Expr::state(idx);
        }
        if (idx < 1) fail("moment symbol M1, M2, ...");
        advance();
        return Expr::moment(idx);
      }
    }
    fail("variable (x<i>, t, M<k>) or function (sin, cos, exp, tanh)");
  }

  Lexer lex_;
  Dims dims_;
  Token cur_;
};

}  // namespace

Expr parse(std::string_view source, Dims dims) {
  if (dims.d < 0 || dims.m < 1) {
    throw InputError("expression dimensions must satisfy d >= 0, m >= 1");
  }
  return Parser(source, dims).parse_all();
}

}  // namespace omtk::dsl
