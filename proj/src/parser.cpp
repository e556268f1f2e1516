#include "pdts/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <vector>

namespace pdts {

namespace {

enum class Tok {
  Ident,
  Number,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Backslash,
  Dot,
  Colon,
  Comma,
  Semi,
  Star,
  Arrow,
  DArrow,
  Equal,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_space();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= text_.size()) {
      tok_.kind = Tok::End;
      tok_.text.clear();
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        bump();
      tok_.kind = Tok::Ident;
      tok_.text = text_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      auto digit_at = [&](std::size_t i) {
        return i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]));
      };
      while (digit_at(pos_)) bump();
      if (pos_ < text_.size() && text_[pos_] == '.' && digit_at(pos_ + 1)) {
        bump();
        while (digit_at(pos_)) bump();
      }
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        std::size_t mark = pos_ + 1;
        if (mark < text_.size() && (text_[mark] == '+' || text_[mark] == '-')) ++mark;
        if (digit_at(mark)) {
          while (pos_ < mark) bump();
          while (digit_at(pos_)) bump();
        }
      }
      tok_.kind = Tok::Number;
      tok_.text = text_.substr(start, pos_ - start);
      return;
    }
    auto two = text_.substr(pos_, 2);
    if (two == "->") {
      tok_.kind = Tok::Arrow;
      bump();
      bump();
      return;
    }
    if (two == "=>") {
      tok_.kind = Tok::DArrow;
      bump();
      bump();
      return;
    }
    bump();
    switch (c) {
      case '(': tok_.kind = Tok::LParen; return;
      case ')': tok_.kind = Tok::RParen; return;
      case '{': tok_.kind = Tok::LBrace; return;
      case '}': tok_.kind = Tok::RBrace; return;
      case '[': tok_.kind = Tok::LBracket; return;
      case ']': tok_.kind = Tok::RBracket; return;
      case '\\': tok_.kind = Tok::Backslash; return;
      case '.': tok_.kind = Tok::Dot; return;
      case ':': tok_.kind = Tok::Colon; return;
      case ',': tok_.kind = Tok::Comma; return;
      case ';': tok_.kind = Tok::Semi; return;
      case '*': tok_.kind = Tok::Star; return;
      case '=': tok_.kind = Tok::Equal; return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_ - 1);
    }
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

bool is_keyword(const std::string& s) {
  static const std::set<std::string> kw = {"if",   "then",   "else", "fst",  "snd",  "pair",
                                           "random", "case", "let",  "in",   "Pi",   "Sigma",
                                           "Bool", "Unit",   "Box",  "true", "false", "unit"};
  return kw.count(s) > 0;
}

class Parser {
 public:
  Parser(const std::string& text, const TypeOracle& oracle) : lex_(text), oracle_(oracle) {}

  ExprPtr parse_top() {
    ExprPtr e = parse_expr();
    expect(Tok::End, "end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, lex_.peek().line, lex_.peek().col);
  }

  Token expect(Tok kind, const std::string& what) {
    if (lex_.peek().kind != kind) fail("expected " + what);
    return lex_.next();
  }

  std::string expect_ident() {
    if (lex_.peek().kind != Tok::Ident || is_keyword(lex_.peek().text))
      fail("expected identifier");
    return lex_.next().text;
  }

  bool peek_ident(const char* word) {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == word;
  }

  bool eat_ident(const char* word) {
    if (peek_ident(word)) {
      lex_.next();
      return true;
    }
    return false;
  }

  // Level 0: binders, if, let.
  ExprPtr parse_expr() {
    if (lex_.peek().kind == Tok::Backslash) {
      lex_.next();
      std::string var = expect_ident();
      expect(Tok::Colon, "':'");
      ExprPtr dom = parse_arrow();
      expect(Tok::Dot, "'.'");
      binders_.push_back({var, dom});
      ExprPtr body = parse_expr();
      binders_.pop_back();
      return mk_lam(var, dom, body);
    }
    if (peek_ident("Pi") || peek_ident("Sigma")) {
      bool pi = lex_.next().text == "Pi";
      std::string var = expect_ident();
      expect(Tok::Colon, "':'");
      ExprPtr dom = parse_arrow();
      expect(Tok::Dot, "'.'");
      binders_.push_back({var, dom});
      ExprPtr body = parse_expr();
      binders_.pop_back();
      return pi ? mk_pi(var, dom, body) : mk_sigma(var, dom, body);
    }
    if (eat_ident("if")) {
      ExprPtr cond = parse_expr();
      if (!eat_ident("then")) fail("expected 'then'");
      ExprPtr t = parse_expr();
      if (!eat_ident("else")) fail("expected 'else'");
      ExprPtr f = parse_expr();
      return mk_if(cond, t, f);
    }
    if (peek_ident("let")) {
      Token at = lex_.next();
      std::string var = expect_ident();
      expect(Tok::Equal, "'='");
      ExprPtr bound = parse_expr();
      if (!eat_ident("in")) fail("expected 'in'");
      ExprPtr dom = elaborate_let(bound, at);
      binders_.push_back({var, dom});
      ExprPtr body = parse_expr();
      binders_.pop_back();
      return mk_app(mk_lam(var, dom, body), bound);
    }
    return parse_arrow();
  }

  // Level 1: A -> B (right associative).
  ExprPtr parse_arrow() {
    ExprPtr lhs = parse_product();
    if (lex_.peek().kind == Tok::Arrow) {
      lex_.next();
      ExprPtr rhs = parse_arrow();
      return mk_pi("_", lhs, rhs);
    }
    return lhs;
  }

  // Level 2: A * B (right associative). A bare '*' after an expression is
  // always this operator; the sort literal needs parentheses there.
  ExprPtr parse_product() {
    ExprPtr lhs = parse_app();
    if (lex_.peek().kind == Tok::Star) {
      lex_.next();
      ExprPtr rhs = parse_product();
      return mk_sigma("_", lhs, rhs);
    }
    return lhs;
  }

  // Level 3: prefix projections and left-associative application.
  ExprPtr parse_app() {
    ExprPtr head = parse_prefix();
    while (starts_atom()) head = mk_app(head, parse_atom());
    return head;
  }

  ExprPtr parse_prefix() {
    if (eat_ident("fst")) return mk_proj(1, parse_prefix());
    if (eat_ident("snd")) return mk_proj(2, parse_prefix());
    return parse_atom();
  }

  bool starts_atom() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::LParen:
      case Tok::Number:
        return true;
      case Tok::Ident:
        return !is_keyword(t.text) || t.text == "true" || t.text == "false" ||
               t.text == "unit" || t.text == "Bool" || t.text == "Unit" || t.text == "Box" ||
               t.text == "pair" || t.text == "random" || t.text == "case";
      default:
        return false;
    }
  }

  ExprPtr parse_atom() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::Star:
        lex_.next();
        return e_star();
      case Tok::Number: {
        Token num = lex_.next();
        if (num.text == "1") return e_one();
        throw ParseError("unexpected numeral '" + num.text + "'", num.line, num.col);
      }
      case Tok::LParen: {
        lex_.next();
        ExprPtr e = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        if (eat_ident("true")) return e_true();
        if (eat_ident("false")) return e_false();
        if (eat_ident("unit")) return e_one();
        if (eat_ident("Bool")) return e_bool_type();
        if (eat_ident("Unit")) return e_unit_type();
        if (eat_ident("Box")) return e_box();
        if (peek_ident("pair")) return parse_pair();
        if (peek_ident("random")) return parse_random();
        if (peek_ident("case")) return parse_case();
        if (is_keyword(t.text)) fail("unexpected keyword '" + t.text + "'");
        return mk_var(lex_.next().text);
      }
      default:
        fail("expected expression");
    }
  }

  ExprPtr parse_pair() {
    Token at = lex_.next();  // pair
    expect(Tok::LParen, "'('");
    ExprPtr l = parse_expr();
    expect(Tok::Comma, "','");
    ExprPtr r = parse_expr();
    expect(Tok::RParen, "')'");
    expect(Tok::Colon, "':'");
    ExprPtr tag = parse_expr();
    try {
      return mk_pair(l, r, tag);
    } catch (const Error& err) {
      throw ParseError(err.what(), at.line, at.col);
    }
  }

  ExprPtr parse_random() {
    Token at = lex_.next();  // random
    expect(Tok::LBracket, "'['");
    Token num = expect(Tok::Number, "real number");
    double rho = 0.0;
    auto res = std::from_chars(num.text.data(), num.text.data() + num.text.size(), rho);
    if (res.ec != std::errc() || res.ptr != num.text.data() + num.text.size())
      throw ParseError("malformed real '" + num.text + "'", num.line, num.col);
    expect(Tok::RBracket, "']'");
    expect(Tok::LParen, "'('");
    ExprPtr target = parse_expr();
    expect(Tok::RParen, "')'");
    try {
      return mk_random(rho, target);
    } catch (const Error& err) {
      throw ParseError(err.what(), at.line, at.col);
    }
  }

  ExprPtr parse_case() {
    lex_.next();  // case
    std::string var = expect_ident();
    expect(Tok::LBrace, "'{'");
    std::vector<DispatchCase> cases;
    binders_.push_back({var, nullptr});
    do {
      ExprPtr ty = parse_expr();
      expect(Tok::DArrow, "'=>'");
      ExprPtr body = parse_expr();
      expect(Tok::Semi, "';'");
      cases.push_back(DispatchCase{ty, body});
    } while (lex_.peek().kind != Tok::RBrace);
    binders_.pop_back();
    expect(Tok::RBrace, "'}'");
    expect(Tok::LParen, "'('");
    ExprPtr arg = parse_expr();
    expect(Tok::RParen, "')'");
    return mk_dispatch(var, cases, arg);
  }

  // Desugaring "let x = e1 in e2" needs e1's type for the binder annotation.
  ExprPtr elaborate_let(const ExprPtr& bound, const Token& at) {
    if (!oracle_)
      throw ParseError("'let' requires a type oracle for elaboration", at.line, at.col);
    Context ctx;
    for (std::size_t i = 0; i < binders_.size(); ++i) {
      const auto& [name, dom] = binders_[i];
      bool shadowed = false;
      for (std::size_t j = i + 1; j < binders_.size(); ++j)
        if (binders_[j].first == name) shadowed = true;
      if (shadowed) continue;
      if (!dom) {
        if (occurs_free(name, bound))
          throw ParseError("'let' over a case-bound variable cannot be elaborated", at.line,
                           at.col);
        continue;
      }
      ctx.push(name, dom);
    }
    try {
      return oracle_(ctx, bound);
    } catch (const std::exception& err) {
      throw ParseError(std::string("cannot elaborate 'let': ") + err.what(), at.line, at.col);
    }
  }

  Lexer lex_;
  const TypeOracle& oracle_;
  std::vector<std::pair<std::string, ExprPtr>> binders_;
};

}  // namespace

ExprPtr parse(const std::string& text, const TypeOracle& oracle) {
  Parser p(text, oracle);
  return p.parse_top();
}

}  // namespace pdts
