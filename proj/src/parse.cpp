#include "pshkit/parse.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>

#include "pshkit/errors.hpp"

namespace pshkit {
namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ScalarField run() {
    ScalarField f = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  ScalarField expr() {
    ScalarField f = term();
    for (;;) {
      if (accept('+')) {
        f = f + term();
      } else if (accept('-')) {
        f = f - term();
      } else {
        return f;
      }
    }
  }

  ScalarField term() {
    ScalarField f = factor();
    for (;;) {
      if (accept('*')) {
        f = f * factor();
      } else if (accept('/')) {
        std::size_t at = pos_;
        ScalarField d = factor();
        if (d.is_zero()) {
          pos_ = at;
          fail("division by the constant zero");
        }
        f = f / d;
      } else {
        return f;
      }
    }
  }

  ScalarField factor() {
    if (accept('-')) return -factor();
    if (accept('+')) return factor();
    ScalarField b = base();
    if (accept('^')) {
      skip_space();
      std::size_t start = pos_;
      bool negative = false;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        negative = text_[pos_] == '-';
        ++pos_;
      }
      std::size_t digits = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == digits) {
        pos_ = start;
        fail("expected integer exponent");
      }
      int k = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + digits, text_.data() + pos_, k);
      if (ec != std::errc()) {
        pos_ = start;
        fail("exponent out of range");
      }
      if (negative) k = -k;
      if (k < 0 && b.is_zero()) {
        pos_ = start;
        fail("negative power of the constant zero");
      }
      b = pow(b, k);
    }
    return b;
  }

  ScalarField number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      std::size_t exp_digits = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == exp_digits) pos_ = save;
    }
    std::string lit(text_.substr(start, pos_ - start));
    char* end = nullptr;
    double v = std::strtod(lit.c_str(), &end);
    if (lit.empty() || end != lit.c_str() + lit.size()) {
      pos_ = start;
      fail("malformed number '" + lit + "'");
    }
    return ScalarField::constant(v);
  }

  ScalarField base() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      ScalarField f = expr();
      expect(')');
      return f;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::string_view name = text_.substr(start, pos_ - start);
      if (name == "i") return ScalarField::constant(complex(0.0, 1.0));
      if (name == "z1") return ScalarField::z1();
      if (name == "z2") return ScalarField::z2();
      using Fn = ScalarField (*)(const ScalarField&);
      Fn fn = nullptr;
      if (name == "re") fn = &re;
      else if (name == "im") fn = &im;
      else if (name == "conj") fn = &conj;
      else if (name == "abs2") fn = &abs2;
      else if (name == "exp") fn = [](const ScalarField& f) { return exp(f); };
      else if (name == "sqrt") fn = [](const ScalarField& f) { return sqrt(f); };
      if (!fn) {
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
      }
      expect('(');
      ScalarField arg = expr();
      expect(')');
      return fn(arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarField parse(std::string_view text) { return Parser(text).run(); }

}  // namespace pshkit
