#include "pdts/mln.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

namespace pdts::mln {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Kahan {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// Online log-sum-exp accumulator.
struct LogSum {
  double max = -std::numeric_limits<double>::infinity();
  double scaled = 0.0;
  void add(double l) {
    if (l <= max) {
      scaled += std::exp(l - max);
    } else {
      scaled = scaled * std::exp(max - l) + 1.0;
      max = l;
    }
  }
  double log() const { return max + std::log(scaled); }
  bool empty() const { return scaled == 0.0; }
};

}  // namespace

FormulaPtr f_atom(std::string pred, std::vector<Term> args) {
  return std::make_shared<Formula>(Formula{Atom{std::move(pred), std::move(args)}});
}
FormulaPtr f_not(FormulaPtr sub) { return std::make_shared<Formula>(Formula{Not{std::move(sub)}}); }
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<Formula>(Formula{And{std::move(a), std::move(b)}});
}
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<Formula>(Formula{Or{std::move(a), std::move(b)}});
}
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<Formula>(Formula{Implies{std::move(a), std::move(b)}});
}
FormulaPtr f_quant(QuantKind k, std::string var, FormulaPtr body) {
  return std::make_shared<Formula>(Formula{Quant{k, std::move(var), std::move(body)}});
}

namespace {

void print_term(const Term& t, std::string& out) {
  out += t.name;
  if (t.kind == Term::Kind::Function) {
    out += '(';
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) out += ", ";
      print_term(t.args[i], out);
    }
    out += ')';
  }
}

// Precedence: quantifiers 0, -> 1 (right), | 2, & 3, ~ 4.
void print_f(const FormulaPtr& f, int min_level, std::string& out) {
  std::visit(
      overloaded{
          [&](const Atom& a) {
            out += a.pred;
            if (!a.args.empty()) {
              out += '(';
              for (std::size_t i = 0; i < a.args.size(); ++i) {
                if (i) out += ", ";
                print_term(a.args[i], out);
              }
              out += ')';
            }
          },
          [&](const Not& n) {
            out += '~';
            print_f(n.sub, 4, out);
          },
          [&](const And& n) {
            bool parens = min_level > 3;
            if (parens) out += '(';
            print_f(n.lhs, 3, out);
            out += " & ";
            print_f(n.rhs, 4, out);
            if (parens) out += ')';
          },
          [&](const Or& n) {
            bool parens = min_level > 2;
            if (parens) out += '(';
            print_f(n.lhs, 2, out);
            out += " | ";
            print_f(n.rhs, 3, out);
            if (parens) out += ')';
          },
          [&](const Implies& n) {
            bool parens = min_level > 1;
            if (parens) out += '(';
            print_f(n.lhs, 2, out);
            out += " -> ";
            print_f(n.rhs, 1, out);
            if (parens) out += ')';
          },
          [&](const Quant& q) {
            bool parens = min_level > 0;
            if (parens) out += '(';
            out += q.kind == QuantKind::Forall ? "forall " : "exists ";
            out += q.var;
            out += ". ";
            print_f(q.body, 0, out);
            if (parens) out += ')';
          },
      },
      f->node);
}

struct FTok {
  enum Kind { Ident, LParen, RParen, Comma, Dot, Not, And, Or, Arrow, End } kind;
  std::string text;
  int col;
};

class FLexer {
 public:
  explicit FLexer(const std::string& s) : s_(s) { advance(); }
  const FTok& peek() const { return tok_; }
  FTok next() {
    FTok t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    tok_.col = static_cast<int>(pos_) + 1;
    if (pos_ >= s_.size()) {
      tok_.kind = FTok::End;
      return;
    }
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      tok_.kind = FTok::Ident;
      tok_.text = s_.substr(start, pos_ - start);
      return;
    }
    if (s_.compare(pos_, 2, "->") == 0) {
      tok_.kind = FTok::Arrow;
      pos_ += 2;
      return;
    }
    ++pos_;
    switch (c) {
      case '(': tok_.kind = FTok::LParen; return;
      case ')': tok_.kind = FTok::RParen; return;
      case ',': tok_.kind = FTok::Comma; return;
      case '.': tok_.kind = FTok::Dot; return;
      case '~': tok_.kind = FTok::Not; return;
      case '&': tok_.kind = FTok::And; return;
      case '|': tok_.kind = FTok::Or; return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "' in formula", 1,
                         static_cast<int>(pos_));
    }
  }
  const std::string& s_;
  std::size_t pos_ = 0;
  FTok tok_;
};

class FParser {
 public:
  explicit FParser(const std::string& s) : lex_(s) {}

  FormulaPtr top() {
    FormulaPtr f = formula();
    if (lex_.peek().kind != FTok::End)
      throw ParseError("trailing input in formula", 1, lex_.peek().col);
    return f;
  }

 private:
  FormulaPtr formula() {
    if (lex_.peek().kind == FTok::Ident &&
        (lex_.peek().text == "forall" || lex_.peek().text == "exists")) {
      QuantKind k = lex_.next().text == "forall" ? QuantKind::Forall : QuantKind::Exists;
      if (lex_.peek().kind != FTok::Ident)
        throw ParseError("expected quantified variable", 1, lex_.peek().col);
      std::string var = lex_.next().text;
      if (lex_.peek().kind == FTok::Dot) lex_.next();
      return f_quant(k, var, formula());
    }
    return implies();
  }

  FormulaPtr implies() {
    FormulaPtr lhs = disj();
    if (lex_.peek().kind == FTok::Arrow) {
      lex_.next();
      return f_implies(lhs, implies());
    }
    return lhs;
  }

  FormulaPtr disj() {
    FormulaPtr f = conj();
    while (lex_.peek().kind == FTok::Or) {
      lex_.next();
      f = f_or(f, conj());
    }
    return f;
  }

  FormulaPtr conj() {
    FormulaPtr f = unary();
    while (lex_.peek().kind == FTok::And) {
      lex_.next();
      f = f_and(f, unary());
    }
    return f;
  }

  FormulaPtr unary() {
    if (lex_.peek().kind == FTok::Not) {
      lex_.next();
      return f_not(unary());
    }
    if (lex_.peek().kind == FTok::LParen) {
      lex_.next();
      FormulaPtr f = formula();
      expect(FTok::RParen, "')'");
      return f;
    }
    if (lex_.peek().kind == FTok::Ident) {
      if (lex_.peek().text == "forall" || lex_.peek().text == "exists") return formula();
      std::string pred = lex_.next().text;
      std::vector<Term> args;
      if (lex_.peek().kind == FTok::LParen) {
        lex_.next();
        args.push_back(term());
        while (lex_.peek().kind == FTok::Comma) {
          lex_.next();
          args.push_back(term());
        }
        expect(FTok::RParen, "')'");
      }
      return f_atom(pred, std::move(args));
    }
    throw ParseError("expected formula", 1, lex_.peek().col);
  }

  Term term() {
    if (lex_.peek().kind != FTok::Ident)
      throw ParseError("expected term", 1, lex_.peek().col);
    std::string name = lex_.next().text;
    if (lex_.peek().kind == FTok::LParen) {
      lex_.next();
      std::vector<Term> args;
      args.push_back(term());
      while (lex_.peek().kind == FTok::Comma) {
        lex_.next();
        args.push_back(term());
      }
      expect(FTok::RParen, "')'");
      return Term{Term::Kind::Function, std::move(name), std::move(args)};
    }
    return Term{Term::Kind::Variable, std::move(name), {}};
  }

  void expect(FTok::Kind k, const char* what) {
    if (lex_.peek().kind != k)
      throw ParseError(std::string("expected ") + what + " in formula", 1, lex_.peek().col);
    lex_.next();
  }

  FLexer lex_;
};

void term_vars(const Term& t, const Signature* sig, std::vector<std::string>& out,
               std::vector<std::string>& bound) {
  if (t.kind == Term::Kind::Function) {
    for (const auto& a : t.args) term_vars(a, sig, out, bound);
    return;
  }
  if (t.kind == Term::Kind::Constant) return;
  if (sig && sig->has_constant(t.name)) return;
  if (std::find(bound.begin(), bound.end(), t.name) != bound.end()) return;
  if (std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
}

void collect_vars(const FormulaPtr& f, const Signature* sig, std::vector<std::string>& out,
                  std::vector<std::string>& bound) {
  std::visit(overloaded{
                 [&](const Atom& a) {
                   for (const auto& t : a.args) term_vars(t, sig, out, bound);
                 },
                 [&](const Not& n) { collect_vars(n.sub, sig, out, bound); },
                 [&](const And& n) {
                   collect_vars(n.lhs, sig, out, bound);
                   collect_vars(n.rhs, sig, out, bound);
                 },
                 [&](const Or& n) {
                   collect_vars(n.lhs, sig, out, bound);
                   collect_vars(n.rhs, sig, out, bound);
                 },
                 [&](const Implies& n) {
                   collect_vars(n.lhs, sig, out, bound);
                   collect_vars(n.rhs, sig, out, bound);
                 },
                 [&](const Quant& q) {
                   bound.push_back(q.var);
                   collect_vars(q.body, sig, out, bound);
                   bound.pop_back();
                 },
             },
             f->node);
}

Term subst_term(const Term& t, const std::string& var, const std::string& constant) {
  if (t.kind == Term::Kind::Function) {
    Term out = t;
    for (auto& a : out.args) a = subst_term(a, var, constant);
    return out;
  }
  if (t.kind == Term::Kind::Variable && t.name == var)
    return Term{Term::Kind::Constant, constant, {}};
  return t;
}

FormulaPtr subst_formula(const FormulaPtr& f, const std::string& var,
                         const std::string& constant) {
  return std::visit(
      overloaded{
          [&](const Atom& a) {
            std::vector<Term> args;
            args.reserve(a.args.size());
            for (const auto& t : a.args) args.push_back(subst_term(t, var, constant));
            return f_atom(a.pred, std::move(args));
          },
          [&](const Not& n) { return f_not(subst_formula(n.sub, var, constant)); },
          [&](const And& n) {
            return f_and(subst_formula(n.lhs, var, constant), subst_formula(n.rhs, var, constant));
          },
          [&](const Or& n) {
            return f_or(subst_formula(n.lhs, var, constant), subst_formula(n.rhs, var, constant));
          },
          [&](const Implies& n) {
            return f_implies(subst_formula(n.lhs, var, constant),
                             subst_formula(n.rhs, var, constant));
          },
          [&](const Quant& q) {
            if (q.var == var) return f;
            return f_quant(q.kind, q.var, subst_formula(q.body, var, constant));
          },
      },
      f->node);
}

// Resolves a ground term to its constant.
std::string eval_term(const Term& t, const Signature& sig) {
  switch (t.kind) {
    case Term::Kind::Constant:
      return t.name;
    case Term::Kind::Variable:
      if (sig.has_constant(t.name)) return t.name;
      throw UnknownSymbol("unbound variable or undeclared constant '" + t.name + "'");
    case Term::Kind::Function: {
      const FuncDecl* fd = sig.find_func(t.name);
      if (!fd) throw UnknownSymbol("undeclared function '" + t.name + "'");
      if (static_cast<int>(t.args.size()) != fd->arity)
        throw UnknownSymbol("function '" + t.name + "' applied at wrong arity");
      std::vector<std::string> args;
      args.reserve(t.args.size());
      for (const auto& a : t.args) args.push_back(eval_term(a, sig));
      auto it = fd->table.find(args);
      if (it == fd->table.end())
        throw MissingFunctionTable("no table entry for '" + t.name + "' at given arguments");
      return it->second;
    }
  }
  throw UnknownSymbol("bad term");
}

}  // namespace

std::string print_formula(const FormulaPtr& f) {
  std::string out;
  print_f(f, 0, out);
  return out;
}

FormulaPtr parse_formula(const std::string& text) { return FParser(text).top(); }

std::vector<std::string> formula_free_vars(const FormulaPtr& f) {
  std::vector<std::string> out, bound;
  collect_vars(f, nullptr, out, bound);
  return out;
}

const PredDecl* Signature::find_pred(const std::string& name) const {
  for (const auto& p : predicates)
    if (p.name == name) return &p;
  return nullptr;
}
const FuncDecl* Signature::find_func(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}
bool Signature::has_constant(const std::string& name) const {
  return std::find(constants.begin(), constants.end(), name) != constants.end();
}

FormulaPtr expand_quantifiers(const FormulaPtr& f, const Signature& sig) {
  return std::visit(
      overloaded{
          [&](const Atom& a) {
            std::vector<Term> args;
            args.reserve(a.args.size());
            for (const auto& t : a.args)
              args.push_back(Term{Term::Kind::Constant, eval_term(t, sig), {}});
            return f_atom(a.pred, std::move(args));
          },
          [&](const Not& n) { return f_not(expand_quantifiers(n.sub, sig)); },
          [&](const And& n) {
            return f_and(expand_quantifiers(n.lhs, sig), expand_quantifiers(n.rhs, sig));
          },
          [&](const Or& n) {
            return f_or(expand_quantifiers(n.lhs, sig), expand_quantifiers(n.rhs, sig));
          },
          [&](const Implies& n) {
            return f_implies(expand_quantifiers(n.lhs, sig), expand_quantifiers(n.rhs, sig));
          },
          [&](const Quant& q) {
            if (sig.constants.empty())
              throw UnknownSymbol("quantifier over an empty constant set");
            FormulaPtr acc;
            for (const auto& c : sig.constants) {
              FormulaPtr inst = expand_quantifiers(subst_formula(q.body, q.var, c), sig);
              if (!acc)
                acc = inst;
              else
                acc = q.kind == QuantKind::Forall ? f_and(acc, inst) : f_or(acc, inst);
            }
            return acc;
          },
      },
      f->node);
}

namespace {

void enumerate_tuples(int arity, const std::vector<std::string>& constants,
                      std::vector<std::string>& cur,
                      const std::function<void(const std::vector<std::string>&)>& fn) {
  if (arity == 0) {
    fn(cur);
    return;
  }
  for (const auto& c : constants) {
    cur.push_back(c);
    enumerate_tuples(arity - 1, constants, cur, fn);
    cur.pop_back();
  }
}

}  // namespace

GroundNetwork ground(const Mln& m) {
  GroundNetwork net;
  net.sig = m.sig;
  for (const auto& p : m.sig.predicates) {
    std::vector<std::string> cur;
    enumerate_tuples(p.arity, m.sig.constants, cur, [&](const std::vector<std::string>& args) {
      GroundAtom atom{p.name, args};
      net.atom_index[atom] = net.atoms.size();
      net.atoms.push_back(std::move(atom));
    });
  }
  if (net.atoms.size() > 64)
    throw TooManyWorlds("ground network has " + std::to_string(net.atoms.size()) +
                        " atoms; world representation is limited to 64");
  for (const auto& wf : m.formulas) {
    std::vector<std::string> vars, bound;
    collect_vars(wf.formula, &m.sig, vars, bound);
    std::vector<FormulaPtr> insts{wf.formula};
    for (const auto& v : vars) {
      if (m.sig.constants.empty())
        throw UnknownSymbol("free variable '" + v + "' with no constants to ground over");
      std::vector<FormulaPtr> next;
      for (const auto& f : insts)
        for (const auto& c : m.sig.constants) next.push_back(subst_formula(f, v, c));
      insts = std::move(next);
    }
    for (const auto& f : insts) {
      FormulaPtr g = expand_quantifiers(f, m.sig);
      net.ground_formulas.push_back(WeightedFormula{g, wf.weight});
    }
  }
  // Validate every ground atom reference.
  for (const auto& gf : net.ground_formulas) {
    std::function<void(const FormulaPtr&)> check = [&](const FormulaPtr& f) {
      std::visit(overloaded{
                     [&](const Atom& a) {
                       const PredDecl* pd = net.sig.find_pred(a.pred);
                       if (!pd) throw UnknownSymbol("undeclared predicate '" + a.pred + "'");
                       if (static_cast<int>(a.args.size()) != pd->arity)
                         throw UnknownSymbol("predicate '" + a.pred + "' applied at wrong arity");
                       GroundAtom atom{a.pred, {}};
                       for (const auto& t : a.args) atom.args.push_back(t.name);
                       if (!net.atom_index.count(atom))
                         throw UnknownSymbol("atom over undeclared constant in '" +
                                             print_formula(f) + "'");
                     },
                     [&](const Not& n) { check(n.sub); },
                     [&](const And& n) {
                       check(n.lhs);
                       check(n.rhs);
                     },
                     [&](const Or& n) {
                       check(n.lhs);
                       check(n.rhs);
                     },
                     [&](const Implies& n) {
                       check(n.lhs);
                       check(n.rhs);
                     },
                     [&](const Quant&) {
                       throw UnknownSymbol("unexpanded quantifier in ground formula");
                     },
                 },
                 f->node);
    };
    check(gf.formula);
  }
  return net;
}

Mln expand_free_variables(const Mln& m) {
  Mln out;
  out.sig = m.sig;
  for (const auto& wf : m.formulas) {
    std::vector<std::string> vars, bound;
    collect_vars(wf.formula, &m.sig, vars, bound);
    std::vector<FormulaPtr> insts{wf.formula};
    for (const auto& v : vars) {
      if (m.sig.constants.empty())
        throw UnknownSymbol("free variable '" + v + "' with no constants to ground over");
      std::vector<FormulaPtr> next;
      for (const auto& f : insts)
        for (const auto& c : m.sig.constants) next.push_back(subst_formula(f, v, c));
      insts = std::move(next);
    }
    for (const auto& f : insts) out.formulas.push_back(WeightedFormula{f, wf.weight});
  }
  return out;
}

bool eval_formula(const FormulaPtr& f, const GroundNetwork& net, const World& w) {
  return std::visit(
      overloaded{
          [&](const Atom& a) {
            GroundAtom atom{a.pred, {}};
            for (const auto& t : a.args) atom.args.push_back(t.name);
            auto it = net.atom_index.find(atom);
            if (it == net.atom_index.end())
              throw UnknownSymbol("unknown ground atom in query: " + print_formula(f));
            return w.get(it->second);
          },
          [&](const Not& n) { return !eval_formula(n.sub, net, w); },
          [&](const And& n) {
            return eval_formula(n.lhs, net, w) && eval_formula(n.rhs, net, w);
          },
          [&](const Or& n) { return eval_formula(n.lhs, net, w) || eval_formula(n.rhs, net, w); },
          [&](const Implies& n) {
            return !eval_formula(n.lhs, net, w) || eval_formula(n.rhs, net, w);
          },
          [&](const Quant&) -> bool {
            throw UnknownSymbol("quantified formula must be expanded before evaluation");
          },
      },
      f->node);
}

double log_world_weight(const GroundNetwork& net, const World& w) {
  Kahan acc;
  for (const auto& gf : net.ground_formulas)
    if (eval_formula(gf.formula, net, w)) acc.add(gf.weight);
  return acc.sum;
}

double world_weight(const GroundNetwork& net, const World& w) {
  return std::exp(log_world_weight(net, w));
}

double query_prob(const GroundNetwork& net, const FormulaPtr& query, const QueryOptions& opts) {
  std::size_t p = net.n_atoms();
  if (p > static_cast<std::size_t>(opts.world_cap))
    throw TooManyWorlds("exact inference over " + std::to_string(p) +
                        " atoms exceeds the cap of " + std::to_string(opts.world_cap));
  FormulaPtr q = expand_quantifiers(query, net.sig);
  FormulaPtr ev = opts.evidence ? expand_quantifiers(opts.evidence, net.sig) : nullptr;
  std::uint64_t n_worlds = 1ull << p;
  if (p <= 16) {
    Kahan num, den;
    for (std::uint64_t bits = 0; bits < n_worlds; ++bits) {
      World w{bits, p};
      if (ev && !eval_formula(ev, net, w)) continue;
      double weight = world_weight(net, w);
      den.add(weight);
      if (eval_formula(q, net, w)) num.add(weight);
    }
    if (den.sum == 0.0) throw Error("evidence excludes every world");
    return num.sum / den.sum;
  }
  LogSum num, den;
  for (std::uint64_t bits = 0; bits < n_worlds; ++bits) {
    World w{bits, p};
    if (ev && !eval_formula(ev, net, w)) continue;
    double lw = log_world_weight(net, w);
    den.add(lw);
    if (eval_formula(q, net, w)) num.add(lw);
  }
  if (den.empty()) throw Error("evidence excludes every world");
  if (num.empty()) return 0.0;
  return std::exp(num.log() - den.log());
}

std::vector<double> world_table(const GroundNetwork& net, int world_cap) {
  std::size_t p = net.n_atoms();
  if (p > static_cast<std::size_t>(world_cap))
    throw TooManyWorlds("world table over " + std::to_string(p) + " atoms exceeds the cap of " +
                        std::to_string(world_cap));
  std::uint64_t n_worlds = 1ull << p;
  std::vector<double> out(n_worlds);
  Kahan z;
  for (std::uint64_t bits = 0; bits < n_worlds; ++bits) {
    out[bits] = world_weight(net, World{bits, p});
    z.add(out[bits]);
  }
  for (auto& x : out) x /= z.sum;
  return out;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

// "NAME/ARITY"
std::pair<std::string, int> parse_slashed(const std::string& s, int line_no) {
  auto pos = s.find('/');
  if (pos == std::string::npos)
    throw ParseError("expected NAME/ARITY, got '" + s + "'", line_no, 1);
  std::string name = trim(s.substr(0, pos));
  int arity = 0;
  try {
    arity = std::stoi(s.substr(pos + 1));
  } catch (...) {
    throw ParseError("bad arity in '" + s + "'", line_no, 1);
  }
  if (name.empty() || arity < 0)
    throw ParseError("bad declaration '" + s + "'", line_no, 1);
  return {name, arity};
}

}  // namespace

Mln parse_mln(const std::string& text) {
  Mln m;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::string pending_function;  // gathers a multi-line function block
  int pending_line = 0;
  auto finish_function = [&](const std::string& block, int at_line) {
    // "function NAME/ARITY { a, b -> c; ... }"
    auto open = block.find('{');
    auto close = block.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw ParseError("malformed function block", at_line, 1);
    auto [name, arity] = parse_slashed(trim(block.substr(0, open)), at_line);
    FuncDecl decl{name, arity, {}};
    std::string body = block.substr(open + 1, close - open - 1);
    std::istringstream entries(body);
    std::string entry;
    while (std::getline(entries, entry, ';')) {
      entry = trim(entry);
      if (entry.empty()) continue;
      auto arrow = entry.find("->");
      if (arrow == std::string::npos)
        throw ParseError("function entry needs '->'", at_line, 1);
      std::string lhs = entry.substr(0, arrow);
      std::string rhs = trim(entry.substr(arrow + 2));
      std::vector<std::string> args;
      std::istringstream argin(lhs);
      std::string a;
      while (std::getline(argin, a, ',')) {
        a = trim(a);
        if (!a.empty()) args.push_back(a);
      }
      if (static_cast<int>(args.size()) != arity)
        throw ParseError("function entry arity mismatch", at_line, 1);
      if (rhs.empty()) throw ParseError("function entry needs a result", at_line, 1);
      decl.table[args] = rhs;
    }
    m.sig.functions.push_back(std::move(decl));
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (!pending_function.empty()) {
      pending_function += ' ';
      pending_function += line;
      if (line.find('}') != std::string::npos) {
        finish_function(pending_function, pending_line);
        pending_function.clear();
      }
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "predicate") {
      std::string rest;
      std::getline(ls, rest);
      auto [name, arity] = parse_slashed(trim(rest), line_no);
      if (m.sig.find_pred(name)) throw DuplicateName(name);
      m.sig.predicates.push_back(PredDecl{name, arity});
    } else if (head == "constant") {
      std::string c;
      while (ls >> c) {
        if (m.sig.has_constant(c)) throw DuplicateName(c);
        m.sig.constants.push_back(c);
      }
    } else if (head == "function") {
      std::string rest;
      std::getline(ls, rest);
      if (rest.find('{') != std::string::npos && rest.find('}') == std::string::npos) {
        pending_function = rest;
        pending_line = line_no;
      } else {
        finish_function(rest, line_no);
      }
    } else {
      auto sep = line.find("::");
      if (sep == std::string::npos)
        throw ParseError("expected 'W :: FORMULA', got '" + line + "'", line_no, 1);
      double w = 0.0;
      try {
        w = std::stod(trim(line.substr(0, sep)));
      } catch (...) {
        throw ParseError("bad weight in '" + line + "'", line_no, 1);
      }
      if (!std::isfinite(w))
        throw ParseError("weight must be finite", line_no, 1);
      FormulaPtr f;
      try {
        f = parse_formula(line.substr(sep + 2));
      } catch (const ParseError& err) {
        throw ParseError(std::string(err.what()), line_no, 1);
      }
      m.formulas.push_back(WeightedFormula{f, w});
    }
  }
  if (!pending_function.empty())
    throw ParseError("unterminated function block", pending_line, 1);
  if (m.sig.constants.empty())
    throw ParseError("at least one constant is required", line_no, 1);
  return m;
}

std::string print_mln(const Mln& m) {
  std::string out;
  for (const auto& p : m.sig.predicates)
    out += "predicate " + p.name + "/" + std::to_string(p.arity) + "\n";
  for (const auto& c : m.sig.constants) out += "constant " + c + "\n";
  for (const auto& f : m.sig.functions) {
    out += "function " + f.name + "/" + std::to_string(f.arity) + " { ";
    for (const auto& [args, res] : f.table) {
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += args[i];
      }
      out += " -> " + res + "; ";
    }
    out += "}\n";
  }
  char buf[64];
  for (const auto& wf : m.formulas) {
    std::snprintf(buf, sizeof buf, "%.17g", wf.weight);
    out += std::string(buf) + " :: " + print_formula(wf.formula) + "\n";
  }
  return out;
}

}  // namespace pdts::mln
