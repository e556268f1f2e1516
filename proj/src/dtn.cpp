#include "pdts/dtn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pdts/kernel.hpp"
#include "pdts/printer.hpp"
#include "pdts/prob.hpp"

namespace pdts::dtn {

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

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

const char* kDomain = "A";
const char* kBot = "bot";

ExprPtr domain_type() { return mk_var(kDomain); }
ExprPtr bot_type_() { return mk_var(kBot); }
ExprPtr domain_pair_type() { return mk_sigma("_", domain_type(), domain_type()); }

std::string witness_name(const mln::GroundAtom& atom, bool positive) {
  std::string out = atom.pred;
  for (const auto& a : atom.args) {
    out += "__";
    out += a;
  }
  out += positive ? "__t" : "__f";
  return out;
}

bool valid_user_name(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

ExprPtr atom_type(const DtnSpec&, const mln::GroundAtom& atom) {
  if (atom.args.size() == 1) return mk_app(mk_var(atom.pred), mk_var(atom.args[0]));
  return mk_app(mk_var(atom.pred),
                mk_pair(mk_var(atom.args[0]), mk_var(atom.args[1]), domain_pair_type()));
}

ExprPtr negated(const ExprPtr& ty) { return mk_pi("_", ty, bot_type_()); }

// Right-nested tuple of values with per-level product tags.
ExprPtr nested_tuple(const std::vector<ExprPtr>& parts, const std::vector<ExprPtr>& types) {
  ExprPtr value = parts.back();
  ExprPtr ty = types.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) {
    ty = mk_sigma("_", types[i], ty);
    value = mk_pair(parts[i], value, ty);
  }
  return value;
}

ExprPtr nested_tuple_type(const std::vector<ExprPtr>& types) {
  ExprPtr ty = types.back();
  for (std::size_t i = types.size() - 1; i-- > 0;) ty = mk_sigma("_", types[i], ty);
  return ty;
}

}  // namespace

std::vector<mln::GroundAtom> ground_atoms(const DtnSpec& spec) {
  std::vector<mln::GroundAtom> atoms;
  for (const auto& p : spec.unary_preds)
    for (std::size_t m = 0; m < spec.n_constants; ++m)
      atoms.push_back(mln::GroundAtom{p, {spec.constant_name(m)}});
  for (const auto& p : spec.binary_preds)
    for (std::size_t m = 0; m < spec.n_constants; ++m)
      for (std::size_t l = 0; l < spec.n_constants; ++l)
        atoms.push_back(mln::GroundAtom{p, {spec.constant_name(m), spec.constant_name(l)}});
  return atoms;
}

std::size_t atom_count(const DtnSpec& spec) {
  return spec.unary_preds.size() * spec.n_constants +
         spec.binary_preds.size() * spec.n_constants * spec.n_constants;
}

mln::Mln signature_as_mln(const DtnSpec& spec) {
  mln::Mln m;
  for (const auto& p : spec.unary_preds) m.sig.predicates.push_back(mln::PredDecl{p, 1});
  for (const auto& p : spec.binary_preds) m.sig.predicates.push_back(mln::PredDecl{p, 2});
  for (std::size_t i = 0; i < spec.n_constants; ++i)
    m.sig.constants.push_back(spec.constant_name(i));
  for (const auto& f : spec.unary_funcs) m.sig.functions.push_back(f);
  for (const auto& f : spec.binary_funcs) m.sig.functions.push_back(f);
  return m;
}

Context build_language_context(const DtnSpec& spec) {
  Context ctx;
  ctx.push(kDomain, e_star());
  ctx.push(kBot, e_star());
  for (std::size_t i = 0; i < spec.n_constants; ++i)
    ctx.push(spec.constant_name(i), domain_type());
  for (const auto& p : spec.unary_preds) ctx.push(p, mk_pi("_", domain_type(), e_star()));
  for (const auto& p : spec.binary_preds) ctx.push(p, mk_pi("_", domain_pair_type(), e_star()));
  for (const auto& f : spec.unary_funcs)
    ctx.push(f.name, mk_pi("_", domain_type(), domain_type()));
  for (const auto& f : spec.binary_funcs)
    ctx.push(f.name, mk_pi("_", domain_pair_type(), domain_type()));
  for (const auto& atom : ground_atoms(spec)) {
    ExprPtr ty = atom_type(spec, atom);
    ctx.push(witness_name(atom, true), ty);
    ctx.push(witness_name(atom, false), negated(ty));
  }
  return ctx;
}

namespace {

ExprPtr term_to_expr(const DtnSpec& spec, const mln::Term& t,
                     const std::vector<std::string>& scope) {
  switch (t.kind) {
    case mln::Term::Kind::Constant:
      return mk_var(t.name);
    case mln::Term::Kind::Variable: {
      if (std::find(scope.begin(), scope.end(), t.name) != scope.end()) return mk_var(t.name);
      for (std::size_t i = 0; i < spec.n_constants; ++i)
        if (spec.constant_name(i) == t.name) return mk_var(t.name);
      throw UnknownSymbol("unknown symbol '" + t.name + "' in formula");
    }
    case mln::Term::Kind::Function: {
      bool ground = true;
      std::vector<std::string> args;
      for (const auto& a : t.args) {
        ExprPtr ae = term_to_expr(spec, a, scope);
        if (!is<Var>(ae)) {
          ground = false;
          break;
        }
        const std::string& n = as<Var>(ae).name;
        bool is_const = false;
        for (std::size_t i = 0; i < spec.n_constants; ++i)
          if (spec.constant_name(i) == n) is_const = true;
        if (!is_const) {
          ground = false;
          break;
        }
        args.push_back(n);
      }
      const mln::FuncDecl* fd = nullptr;
      for (const auto& f : spec.unary_funcs)
        if (f.name == t.name) fd = &f;
      for (const auto& f : spec.binary_funcs)
        if (f.name == t.name) fd = &f;
      if (!fd) throw UnknownSymbol("undeclared function '" + t.name + "'");
      if (t.args.size() != static_cast<std::size_t>(fd->arity))
        throw UnknownSymbol("function '" + t.name + "' applied at wrong arity");
      if (ground) {
        auto it = fd->table.find(args);
        if (it == fd->table.end())
          throw MissingFunctionTable("no table entry for '" + t.name + "'");
        return mk_var(it->second);
      }
      if (fd->arity == 1)
        return mk_app(mk_var(t.name), term_to_expr(spec, t.args[0], scope));
      ExprPtr a0 = term_to_expr(spec, t.args[0], scope);
      ExprPtr a1 = term_to_expr(spec, t.args[1], scope);
      if (!is_value(a0) || !is_value(a1))
        throw UnknownSymbol("nested function arguments must resolve to constants");
      return mk_app(mk_var(t.name), mk_pair(a0, a1, domain_pair_type()));
    }
  }
  throw UnknownSymbol("bad term");
}

ExprPtr f2t(const DtnSpec& spec, const mln::FormulaPtr& f, std::vector<std::string>& scope) {
  return std::visit(
      overloaded{
          [&](const mln::Atom& a) -> ExprPtr {
            bool unary = std::find(spec.unary_preds.begin(), spec.unary_preds.end(), a.pred) !=
                         spec.unary_preds.end();
            bool binary = std::find(spec.binary_preds.begin(), spec.binary_preds.end(), a.pred) !=
                          spec.binary_preds.end();
            if (!unary && !binary)
              throw UnknownSymbol("undeclared predicate '" + a.pred + "'");
            if (unary) {
              if (a.args.size() != 1)
                throw UnknownSymbol("predicate '" + a.pred + "' expects one argument");
              return mk_app(mk_var(a.pred), term_to_expr(spec, a.args[0], scope));
            }
            if (a.args.size() != 2)
              throw UnknownSymbol("predicate '" + a.pred + "' expects two arguments");
            ExprPtr a0 = term_to_expr(spec, a.args[0], scope);
            ExprPtr a1 = term_to_expr(spec, a.args[1], scope);
            if (!is_value(a0) || !is_value(a1))
              throw UnknownSymbol(
                  "binary predicate arguments must be constants, bound variables, or ground "
                  "function applications");
            return mk_app(mk_var(a.pred), mk_pair(a0, a1, domain_pair_type()));
          },
          [&](const mln::Not& n) -> ExprPtr { return negated(f2t(spec, n.sub, scope)); },
          [&](const mln::And& n) -> ExprPtr {
            return mk_sigma("_", f2t(spec, n.lhs, scope), f2t(spec, n.rhs, scope));
          },
          [&](const mln::Or& n) -> ExprPtr {
            return mk_sigma("_b", e_bool_type(),
                            mk_if(mk_var("_b"), f2t(spec, n.lhs, scope),
                                  f2t(spec, n.rhs, scope)));
          },
          [&](const mln::Implies& n) -> ExprPtr {
            return mk_pi("_", f2t(spec, n.lhs, scope), f2t(spec, n.rhs, scope));
          },
          [&](const mln::Quant& q) -> ExprPtr {
            if (!valid_user_name(q.var))
              throw UnknownSymbol("bad quantified variable '" + q.var + "'");
            scope.push_back(q.var);
            ExprPtr body = f2t(spec, q.body, scope);
            scope.pop_back();
            return q.kind == mln::QuantKind::Forall ? mk_pi(q.var, domain_type(), body)
                                                    : mk_sigma(q.var, domain_type(), body);
          },
      },
      f->node);
}

mln::Term expr_to_term(const DtnSpec& spec, const ExprPtr& e) {
  if (is<Var>(e)) return mln::Term{mln::Term::Kind::Variable, as<Var>(e).name, {}};
  if (is<App>(e)) {
    const auto& a = as<App>(e);
    if (!is<Var>(a.fun)) throw UnknownSymbol("not a formula term: " + print(e));
    std::vector<mln::Term> args;
    if (is<Pair>(a.arg)) {
      args.push_back(expr_to_term(spec, as<Pair>(a.arg).left));
      args.push_back(expr_to_term(spec, as<Pair>(a.arg).right));
    } else {
      args.push_back(expr_to_term(spec, a.arg));
    }
    return mln::Term{mln::Term::Kind::Function, as<Var>(a.fun).name, std::move(args)};
  }
  throw UnknownSymbol("not a formula term: " + print(e));
}

bool is_pred(const DtnSpec& spec, const std::string& name) {
  return std::find(spec.unary_preds.begin(), spec.unary_preds.end(), name) !=
             spec.unary_preds.end() ||
         std::find(spec.binary_preds.begin(), spec.binary_preds.end(), name) !=
             spec.binary_preds.end();
}

mln::FormulaPtr t2f(const DtnSpec& spec, const ExprPtr& ty) {
  if (is<App>(ty)) {
    const auto& a = as<App>(ty);
    if (!is<Var>(a.fun) || !is_pred(spec, as<Var>(a.fun).name))
      throw UnknownSymbol("type is not a formula: " + print(ty));
    std::vector<mln::Term> args;
    if (is<Pair>(a.arg)) {
      args.push_back(expr_to_term(spec, as<Pair>(a.arg).left));
      args.push_back(expr_to_term(spec, as<Pair>(a.arg).right));
    } else {
      args.push_back(expr_to_term(spec, a.arg));
    }
    return mln::f_atom(as<Var>(a.fun).name, std::move(args));
  }
  if (is<Pi>(ty)) {
    const auto& p = as<Pi>(ty);
    if (alpha_eq(p.domain, domain_type()))
      return mln::f_quant(mln::QuantKind::Forall, p.var, t2f(spec, p.body));
    if (alpha_eq(p.body, bot_type_())) return mln::f_not(t2f(spec, p.domain));
    if (occurs_free(p.var, p.body))
      throw UnknownSymbol("type is not a formula: " + print(ty));
    return mln::f_implies(t2f(spec, p.domain), t2f(spec, p.body));
  }
  if (is<Sigma>(ty)) {
    const auto& s = as<Sigma>(ty);
    if (alpha_eq(s.domain, e_bool_type()) && is<If>(s.body)) {
      const auto& i = as<If>(s.body);
      if (is<Var>(i.cond) && as<Var>(i.cond).name == s.var)
        return mln::f_or(t2f(spec, i.then_branch), t2f(spec, i.else_branch));
    }
    if (alpha_eq(s.domain, domain_type()))
      return mln::f_quant(mln::QuantKind::Exists, s.var, t2f(spec, s.body));
    if (occurs_free(s.var, s.body))
      throw UnknownSymbol("type is not a formula: " + print(ty));
    return mln::f_and(t2f(spec, s.domain), t2f(spec, s.body));
  }
  throw UnknownSymbol("type is not a formula: " + print(ty));
}

}  // namespace

ExprPtr formula_to_type(const DtnSpec& spec, const mln::FormulaPtr& f) {
  std::vector<std::string> scope;
  return f2t(spec, f, scope);
}

mln::FormulaPtr type_to_formula(const DtnSpec& spec, const ExprPtr& ty) {
  return t2f(spec, ty);
}

bool consistent(const DtnSpec& spec, const DtnWorld& world, std::size_t f_index) {
  if (f_index >= spec.formulas.size()) throw Error("formula index out of range");
  mln::Mln sig = signature_as_mln(spec);
  mln::GroundNetwork net = mln::ground(sig);
  mln::FormulaPtr expanded = mln::expand_quantifiers(spec.formulas[f_index].formula, sig.sig);
  return mln::eval_formula(expanded, net, mln::World{world.bits, world.n_atoms});
}

namespace {

// Unnormalized world weight: total probability mass of formula subsets the
// world is consistent with.
double subset_mass(const std::vector<double>& ps, const std::vector<bool>& cons) {
  std::size_t nf = ps.size();
  if (nf <= 20) {
    Kahan total;
    for (std::uint64_t h = 0; h < (1ull << nf); ++h) {
      double prod = 1.0;
      bool ok = true;
      for (std::size_t j = 0; j < nf; ++j) {
        if ((h >> j) & 1u) {
          if (!cons[j]) {
            ok = false;
            break;
          }
          prod *= ps[j];
        } else {
          prod *= 1.0 - ps[j];
        }
      }
      if (ok) total.add(prod);
    }
    return total.sum;
  }
  double prod = 1.0;
  for (std::size_t j = 0; j < nf; ++j) prod *= cons[j] ? 1.0 : 1.0 - ps[j];
  return prod;
}

}  // namespace

std::vector<double> world_table(const DtnSpec& spec, const WorldOptions& opts) {
  std::size_t nd = atom_count(spec);
  if (nd > static_cast<std::size_t>(opts.atom_cap))
    throw TooManyAtoms("language has " + std::to_string(nd) + " ground atoms, cap is " +
                       std::to_string(opts.atom_cap));
  mln::Mln sig = signature_as_mln(spec);
  mln::GroundNetwork net = mln::ground(sig);
  std::vector<mln::FormulaPtr> expanded;
  std::vector<double> ps;
  for (const auto& f : spec.formulas) {
    expanded.push_back(mln::expand_quantifiers(f.formula, sig.sig));
    ps.push_back(f.p);
  }
  std::uint64_t n_worlds = 1ull << nd;
  std::vector<double> out(n_worlds);
  Kahan z;
  std::vector<bool> cons(spec.formulas.size());
  for (std::uint64_t bits = 0; bits < n_worlds; ++bits) {
    mln::World w{bits, nd};
    for (std::size_t j = 0; j < expanded.size(); ++j)
      cons[j] = mln::eval_formula(expanded[j], net, w);
    out[bits] = subset_mass(ps, cons);
    z.add(out[bits]);
  }
  if (z.sum <= 0.0) throw Error("all worlds have zero mass");
  for (auto& x : out) x /= z.sum;
  return out;
}

double world_prob(const DtnSpec& spec, const DtnWorld& world, const WorldOptions& opts) {
  return world_table(spec, opts).at(world.bits);
}

double query_exact(const DtnSpec& spec, const mln::FormulaPtr& query, const WorldOptions& opts) {
  std::size_t nd = atom_count(spec);
  mln::Mln sig = signature_as_mln(spec);
  mln::GroundNetwork net = mln::ground(sig);
  mln::FormulaPtr q = mln::expand_quantifiers(query, sig.sig);
  std::vector<double> table = world_table(spec, opts);
  Kahan mass;
  for (std::uint64_t bits = 0; bits < table.size(); ++bits)
    if (mln::eval_formula(q, net, mln::World{bits, nd})) mass.add(table[bits]);
  return mass.sum;
}

namespace {

struct ProgramBuilder {
  const DtnSpec& spec;
  std::vector<mln::GroundAtom> atoms;
  std::vector<ExprPtr> atom_pos, atom_neg;   // typed both polarities
  std::vector<ExprPtr> formula_types;        // normalized
  std::size_t nf = 0, nd = 0;
  mln::GroundNetwork net;
  mln::FormulaPtr query;                     // classical reading of the query type
  std::vector<mln::FormulaPtr> expanded_formulas;

  explicit ProgramBuilder(const DtnSpec& s) : spec(s) {}

  std::string xvar(std::size_t i) const { return "_x" + std::to_string(i + 1); }
  std::string vvar(std::size_t i) const { return "_v" + std::to_string(i + 1); }
  std::string dvar(std::size_t i) const { return "_d" + std::to_string(i + 1); }
  std::string uvar(std::size_t i) const { return "_u" + std::to_string(i + 1); }

  ExprPtr world_type(std::uint64_t bits) const {
    std::vector<ExprPtr> parts;
    for (std::size_t k = 0; k < nd; ++k)
      parts.push_back(((bits >> k) & 1u) ? atom_pos[k] : atom_neg[k]);
    return nested_tuple_type(parts);
  }

  bool query_true(std::uint64_t bits) const {
    return mln::eval_formula(query, net, mln::World{bits, nd});
  }

  bool world_consistent(std::uint64_t bits, std::size_t j) const {
    return mln::eval_formula(expanded_formulas[j], net, mln::World{bits, nd});
  }

  // Coin for formula i: selects the proof constant or the unit value.
  ExprPtr formula_coin(std::size_t i) const {
    return mk_random(spec.formulas[i].p,
                     mk_lam("_b", e_bool_type(),
                            mk_if(mk_var("_b"), mk_var(spec.formulas[i].name), e_one())));
  }

  // Fair coin for ground atom k: selects one of the two proof witnesses.
  ExprPtr atom_coin(std::size_t k) const {
    return mk_random(0.5, mk_lam("_b", e_bool_type(),
                                 mk_if(mk_var("_b"), mk_var(witness_name(atoms[k], true)),
                                       mk_var(witness_name(atoms[k], false)))));
  }

  // World sampler: binds one coin per atom, then re-dispatches the bound
  // proofs to assemble the world tuple under its per-world product tag.
  ExprPtr build_world_sampler() const {
    ExprPtr body = build_world_tagger(0, 0);
    for (std::size_t k = nd; k-- > 0;) {
      std::vector<DispatchCase> cases{{atom_pos[k], body}, {atom_neg[k], body}};
      body = mk_dispatch(dvar(k), std::move(cases), atom_coin(k));
    }
    return body;
  }

  // The tuple itself is built over the sampler's bound proofs; the nested
  // dispatches only recover the per-path product tag.
  ExprPtr build_world_tagger(std::size_t k, std::uint64_t bits) const {
    if (k == nd) {
      std::vector<ExprPtr> parts, types;
      for (std::size_t j = 0; j < nd; ++j) {
        parts.push_back(mk_var(dvar(j)));
        types.push_back(((bits >> j) & 1u) ? atom_pos[j] : atom_neg[j]);
      }
      return nested_tuple(parts, types);
    }
    std::vector<DispatchCase> cases{
        {atom_pos[k], build_world_tagger(k + 1, bits | (1ull << k))},
        {atom_neg[k], build_world_tagger(k + 1, bits)}};
    return mk_dispatch(uvar(k), std::move(cases), mk_var(dvar(k)));
  }

  // Tuple tagger over the formula bindings and the world binding; `chosen`
  // records which formula proofs were selected.
  ExprPtr build_tagger(std::size_t i, std::uint64_t chosen) const {
    if (i == nf) {
      std::vector<DispatchCase> cases;
      for (std::uint64_t w = 0; w < (1ull << nd); ++w)
        cases.push_back(DispatchCase{world_type(w), full_tuple(chosen, w)});
      return mk_dispatch(vvar(nf), std::move(cases), mk_var(xvar(nf)));
    }
    std::vector<DispatchCase> cases{
        {formula_types[i], build_tagger(i + 1, chosen | (1ull << i))},
        {e_unit_type(), build_tagger(i + 1, chosen)}};
    return mk_dispatch(vvar(i), std::move(cases), mk_var(xvar(i)));
  }

  ExprPtr full_tuple(std::uint64_t chosen, std::uint64_t w) const {
    std::vector<ExprPtr> parts, types;
    for (std::size_t i = 0; i < nf; ++i) {
      parts.push_back(mk_var(xvar(i)));
      types.push_back(((chosen >> i) & 1u) ? formula_types[i] : e_unit_type());
    }
    parts.push_back(mk_var(xvar(nf)));
    types.push_back(world_type(w));
    return nested_tuple(parts, types);
  }

  ExprPtr tuple_type(std::uint64_t chosen, std::uint64_t w) const {
    std::vector<ExprPtr> types;
    for (std::size_t i = 0; i < nf; ++i)
      types.push_back(((chosen >> i) & 1u) ? formula_types[i] : e_unit_type());
    types.push_back(world_type(w));
    return nested_tuple_type(types);
  }

  // The exhaustive case list over every reachable tuple type, mapping each to
  // a proof of Q, of ~Q, or of the contradiction.
  ExprPtr build_final_dispatch() const {
    std::vector<DispatchCase> cases;
    for (std::uint64_t chosen = 0; chosen < (1ull << nf); ++chosen) {
      for (std::uint64_t w = 0; w < (1ull << nd); ++w) {
        ExprPtr outcome;
        bool contradiction = false;
        for (std::size_t j = 0; j < nf; ++j)
          if (((chosen >> j) & 1u) && !world_consistent(w, j)) contradiction = true;
        if (contradiction)
          outcome = mk_var("_qbot");
        else
          outcome = query_true(w) ? mk_var("_qpos") : mk_var("_qneg");
        cases.push_back(DispatchCase{tuple_type(chosen, w), outcome});
      }
    }
    return mk_dispatch("_z", std::move(cases), build_tagger(0, 0));
  }

  ExprPtr build_program() const {
    ExprPtr body = build_final_dispatch();
    // World binding.
    {
      std::vector<DispatchCase> cases;
      for (std::uint64_t w = 0; w < (1ull << nd); ++w)
        cases.push_back(DispatchCase{world_type(w), body});
      body = mk_dispatch(xvar(nf), std::move(cases), build_world_sampler());
    }
    for (std::size_t i = nf; i-- > 0;) {
      std::vector<DispatchCase> cases{{formula_types[i], body}, {e_unit_type(), body}};
      body = mk_dispatch(xvar(i), std::move(cases), formula_coin(i));
    }
    return body;
  }
};

}  // namespace

QueryProgram build_query_program(const DtnSpec& spec, const ExprPtr& q_type) {
  ProgramBuilder b(spec);
  b.nf = spec.formulas.size();
  b.nd = atom_count(spec);
  if (b.nd == 0) throw Error("query over a language with no ground atoms");
  // The final case list is exhaustive over formula choices x worlds.
  if (b.nf + b.nd > 16)
    throw TooManyAtoms("query program over " + std::to_string(b.nf) + " formulas and " +
                       std::to_string(b.nd) + " ground atoms is too large to build");
  b.atoms = ground_atoms(spec);
  for (const auto& atom : b.atoms) {
    ExprPtr pos = atom_type(spec, atom);
    b.atom_pos.push_back(pos);
    b.atom_neg.push_back(negated(pos));
  }
  mln::Mln sig = signature_as_mln(spec);
  b.net = mln::ground(sig);
  for (const auto& f : spec.formulas) {
    b.formula_types.push_back(normalize(formula_to_type(spec, f.formula)));
    b.expanded_formulas.push_back(mln::expand_quantifiers(f.formula, sig.sig));
  }

  QueryProgram out;
  out.ctx = build_language_context(spec);
  for (std::size_t i = 0; i < b.nf; ++i)
    out.ctx.push(spec.formulas[i].name, b.formula_types[i]);
  out.q_type = normalize(q_type);
  out.q_neg_type = negated(out.q_type);
  out.bot_type = bot_type_();
  b.query = mln::expand_quantifiers(type_to_formula(spec, out.q_type), sig.sig);
  out.ctx.push("_qpos", out.q_type);
  out.ctx.push("_qneg", out.q_neg_type);
  out.ctx.push("_qbot", out.bot_type);
  validate_context(out.ctx);
  out.program = b.build_program();
  return out;
}

SampleStats query_sampled(const DtnSpec& spec, const mln::FormulaPtr& query, std::uint64_t n,
                          std::uint64_t seed, std::uint64_t fuel) {
  QueryProgram qp = build_query_program(spec, formula_to_type(spec, query));
  SampleStats stats;
  stats.n_samples = n;
  // The per-sample seed depends only on (seed, index), so any partition of
  // the index range across workers reproduces the same classification counts.
  std::uint64_t stream = splitmix64(seed);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t sample_seed = splitmix64(stream + i);
    auto res = sample_reduce(qp.ctx, qp.program, sample_seed, fuel);
    if (check_judgment(qp.ctx, res.normal_form, qp.q_type))
      ++stats.n_pos;
    else if (check_judgment(qp.ctx, res.normal_form, qp.q_neg_type))
      ++stats.n_neg;
    else if (check_judgment(qp.ctx, res.normal_form, qp.bot_type))
      ++stats.n_rejected;
    else
      throw Error("sample reduced to an unclassifiable normal form: " +
                  print(res.normal_form));
  }
  std::uint64_t kept = stats.n_pos + stats.n_neg;
  if (kept == 0) throw AllSamplesRejected("every sample reduced to a contradiction proof");
  stats.estimate = static_cast<double>(stats.n_pos) / static_cast<double>(kept);
  stats.std_error =
      std::sqrt(std::max(0.0, stats.estimate * (1.0 - stats.estimate)) /
                static_cast<double>(kept));
  return stats;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

DtnSpec parse_dtn(const std::string& text) {
  DtnSpec spec;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool have_domain = false;
  auto check_name = [&](const std::string& n) {
    if (!valid_user_name(n))
      throw ParseError("bad name '" + n + "' (must start with a letter)", line_no, 1);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    auto pos = raw.find('#');
    std::string line = trim(pos == std::string::npos ? raw : raw.substr(0, pos));
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "domain") {
      long n = -1;
      ls >> n;
      if (n < 1 || n > 62) throw ParseError("domain size must be in [1, 62]", line_no, 1);
      spec.n_constants = static_cast<std::size_t>(n);
      have_domain = true;
    } else if (head == "unary" || head == "binary") {
      std::string name;
      while (ls >> name) {
        check_name(name);
        auto& v = head == "unary" ? spec.unary_preds : spec.binary_preds;
        for (const auto& existing : spec.unary_preds)
          if (existing == name) throw DuplicateName(name);
        for (const auto& existing : spec.binary_preds)
          if (existing == name) throw DuplicateName(name);
        v.push_back(name);
      }
    } else if (head == "function") {
      std::string rest;
      std::getline(ls, rest);
      // Reuse the MLN function block syntax.
      std::string block = "function" + rest;
      mln::Mln tmp = [&] {
        try {
          return mln::parse_mln(block + "\nconstant c1\n");
        } catch (const ParseError& e) {
          throw ParseError(e.what(), line_no, 1);
        }
      }();
      if (tmp.sig.functions.size() != 1)
        throw ParseError("malformed function declaration", line_no, 1);
      mln::FuncDecl decl = tmp.sig.functions[0];
      check_name(decl.name);
      if (decl.arity == 1)
        spec.unary_funcs.push_back(std::move(decl));
      else if (decl.arity == 2)
        spec.binary_funcs.push_back(std::move(decl));
      else
        throw ParseError("functions must be unary or binary", line_no, 1);
    } else if (head == "formula") {
      // formula NAME : FORMULA @ P   |   formula NAME : FORMULA @w W
      auto colon = line.find(':');
      auto at = line.rfind('@');
      if (colon == std::string::npos || at == std::string::npos || at < colon)
        throw ParseError("expected 'formula NAME : FORMULA @ P'", line_no, 1);
      std::string name = trim(line.substr(7, colon - 7));
      check_name(name);
      for (const auto& f : spec.formulas)
        if (f.name == name) throw DuplicateName(name);
      std::string ftext = line.substr(colon + 1, at - colon - 1);
      std::string wtext = trim(line.substr(at + 1));
      double p = 0.0;
      try {
        if (!wtext.empty() && wtext[0] == 'w') {
          double w = std::stod(trim(wtext.substr(1)));
          if (!(w > 0.0))
            throw ParseError("@w weight must be positive", line_no, 1);
          p = 1.0 - std::exp(-w);
        } else {
          p = std::stod(wtext);
        }
      } catch (const ParseError&) {
        throw;
      } catch (...) {
        throw ParseError("bad weight '" + wtext + "'", line_no, 1);
      }
      if (!(p > 0.0 && p < 1.0))
        throw ParseError("formula weight must lie strictly in (0,1)", line_no, 1);
      mln::FormulaPtr f;
      try {
        f = mln::parse_formula(ftext);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line_no, 1);
      }
      spec.formulas.push_back(DtnFormula{name, f, p});
    } else {
      throw ParseError("unknown directive '" + head + "'", line_no, 1);
    }
  }
  if (!have_domain) throw ParseError("missing 'domain N' line", line_no, 1);
  return spec;
}

std::string print_dtn(const DtnSpec& spec) {
  std::string out = "domain " + std::to_string(spec.n_constants) + "\n";
  if (!spec.unary_preds.empty()) {
    out += "unary";
    for (const auto& p : spec.unary_preds) out += " " + p;
    out += "\n";
  }
  if (!spec.binary_preds.empty()) {
    out += "binary";
    for (const auto& p : spec.binary_preds) out += " " + p;
    out += "\n";
  }
  auto emit_funcs = [&](const std::vector<mln::FuncDecl>& fs) {
    for (const auto& f : fs) {
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
  };
  emit_funcs(spec.unary_funcs);
  emit_funcs(spec.binary_funcs);
  char buf[64];
  for (const auto& f : spec.formulas) {
    std::snprintf(buf, sizeof buf, "%.17g", f.p);
    out += "formula " + f.name + " : " + mln::print_formula(f.formula) + " @ " + buf + "\n";
  }
  return out;
}

}  // namespace pdts::dtn
