#include "pdts/printer.hpp"

#include <charconv>
#include <variant>

namespace pdts {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Precedence levels, loosest first:
//   0 binders / if / pair literals
//   1 arrow sugar        (right associative)
//   2 product sugar      (right associative)
//   3 application / fst / snd (left associative)
//   4 atoms
constexpr int kOpen = 0, kArrow = 1, kProduct = 2, kApp = 3, kAtom = 4;

std::string fmt_double(double d) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

void go(const ExprPtr& e, int min_level, std::string& out) {
  std::visit(
      overloaded{
          [&](const Const& c) {
            switch (c.k) {
              case ConstKind::One: out += "1"; break;
              case ConstKind::True: out += "true"; break;
              case ConstKind::False: out += "false"; break;
              case ConstKind::UnitType: out += "Unit"; break;
              case ConstKind::BoolType: out += "Bool"; break;
            }
          },
          [&](const Sort& s) {
            // a bare '*' after an expression would parse as the product
            // operator, so the sort needs parentheses in argument position
            if (s.s == SortKind::Star)
              out += min_level >= kAtom ? "(*)" : "*";
            else
              out += "Box";
          },
          [&](const Var& v) { out += v.name; },
          [&](const Pair& p) {
            bool parens = kOpen < min_level;
            if (parens) out += '(';
            out += "pair(";
            go(p.left, kOpen, out);
            out += ", ";
            go(p.right, kOpen, out);
            out += ") : ";
            go(p.tag, kArrow, out);
            if (parens) out += ')';
          },
          [&](const App& a) {
            if (kApp < min_level) {
              out += '(';
              go(e, kOpen, out);
              out += ')';
              return;
            }
            go(a.fun, kApp, out);
            out += ' ';
            go(a.arg, kAtom, out);
          },
          [&](const Lam& l) {
            if (kOpen < min_level) {
              out += '(';
              go(e, kOpen, out);
              out += ')';
              return;
            }
            out += '\\';
            out += l.var;
            out += ':';
            go(l.domain, kArrow, out);
            out += ". ";
            go(l.body, kOpen, out);
          },
          [&](const If& i) {
            if (kOpen < min_level) {
              out += '(';
              go(e, kOpen, out);
              out += ')';
              return;
            }
            out += "if ";
            go(i.cond, kArrow, out);
            out += " then ";
            go(i.then_branch, kArrow, out);
            out += " else ";
            go(i.else_branch, kOpen, out);
          },
          [&](const Proj& p) {
            if (kApp < min_level) {
              out += '(';
              go(e, kOpen, out);
              out += ')';
              return;
            }
            out += p.index == 1 ? "fst " : "snd ";
            go(p.target, kAtom, out);
          },
          [&](const Pi& p) {
            if (p.var == "_" && !occurs_free(p.var, p.body)) {
              if (kArrow < min_level) {
                out += '(';
                go(e, kOpen, out);
                out += ')';
                return;
              }
              go(p.domain, kProduct, out);
              out += " -> ";
              go(p.body, kArrow, out);
              return;
            }
            if (kOpen < min_level) {
              out += '(';
              go(e, kOpen, out);
              out += ')';
              return;
            }
            out += "Pi ";
            out += p.var;
            out += ':';
            go(p.domain, kArrow, out);
            out += ". ";
            go(p.body, kOpen, out);
          },
          [&](const Sigma& s) {
            if (s.var == "_" && !occurs_free(s.var, s.body)) {
              if (kProduct < min_level) {
                out += '(';
                go(e, kOpen, out);
                out += ')';
                return;
              }
              go(s.domain, kApp, out);
              out += " * ";
              go(s.body, kProduct, out);
              return;
            }
            if (kOpen < min_level) {
              out += '(';
              go(e, kOpen, out);
              out += ')';
              return;
            }
            out += "Sigma ";
            out += s.var;
            out += ':';
            go(s.domain, kArrow, out);
            out += ". ";
            go(s.body, kOpen, out);
          },
          [&](const Random& r) {
            out += "random[";
            out += fmt_double(r.rho);
            out += "](";
            go(r.target, kOpen, out);
            out += ')';
          },
          [&](const DispatchApp& d) {
            out += "case ";
            out += d.var;
            out += " {";
            for (std::size_t i = 0; i < d.cases.size(); ++i) {
              if (i) out += ' ';
              go(d.cases[i].type, kOpen, out);
              out += " => ";
              go(d.cases[i].body, kOpen, out);
              out += ';';
            }
            out += "}(";
            go(d.arg, kOpen, out);
            out += ')';
          },
      },
      e->node);
}

}  // namespace

std::string print(const ExprPtr& e) {
  std::string out;
  out.reserve(e->size * 4);
  go(e, kOpen, out);
  return out;
}

std::string print_context(const Context& ctx) {
  std::string out = "<";
  bool first = true;
  for (const auto& en : ctx.entries()) {
    if (!first) out += ", ";
    first = false;
    out += en.name;
    out += " : ";
    out += print(en.type);
  }
  out += ">";
  return out;
}

}  // namespace pdts
