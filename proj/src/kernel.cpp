#include "pdts/kernel.hpp"

#include <algorithm>

#include "pdts/printer.hpp"

namespace pdts {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Does body contain a pair whose component mentions `var`? Such a pair forces
// the substituted term to be a value.
bool pair_mentions(const ExprPtr& e, const std::string& var) {
  if (!(e->name_bloom & name_bloom_bit(var))) return false;
  return std::visit(
      overloaded{
          [&](const Pair& p) {
            return occurs_free(var, p.left) || occurs_free(var, p.right) ||
                   pair_mentions(p.tag, var);
          },
          [&](const App& a) { return pair_mentions(a.fun, var) || pair_mentions(a.arg, var); },
          [&](const Lam& l) {
            return pair_mentions(l.domain, var) ||
                   (l.var != var && pair_mentions(l.body, var));
          },
          [&](const If& i) {
            return pair_mentions(i.cond, var) || pair_mentions(i.then_branch, var) ||
                   pair_mentions(i.else_branch, var);
          },
          [&](const Proj& p) { return pair_mentions(p.target, var); },
          [&](const Pi& p) {
            return pair_mentions(p.domain, var) ||
                   (p.var != var && pair_mentions(p.body, var));
          },
          [&](const Sigma& s) {
            return pair_mentions(s.domain, var) ||
                   (s.var != var && pair_mentions(s.body, var));
          },
          [&](const Random& r) { return pair_mentions(r.target, var); },
          [&](const DispatchApp& d) {
            if (pair_mentions(d.arg, var)) return true;
            if (d.var == var) return false;
            for (const auto& c : d.cases)
              if (pair_mentions(c.type, var) || pair_mentions(c.body, var)) return true;
            return false;
          },
          [&](const auto&) { return false; },
      },
      e->node);
}

// Can the beta rules contract this node? (Substitution-side conditions included;
// the argument of an application must already be deterministic.)
bool is_beta_redex(const ExprPtr& e) {
  if (is<Proj>(e)) return is<Pair>(as<Proj>(e).target);
  if (is<If>(e)) {
    const auto& c = as<If>(e).cond;
    return is<Const>(c) &&
           (as<Const>(c).k == ConstKind::True || as<Const>(c).k == ConstKind::False);
  }
  if (is<App>(e)) {
    const auto& a = as<App>(e);
    if (!is<Lam>(a.fun)) return false;
    if (!is_deterministic(a.arg)) return false;
    const auto& l = as<Lam>(a.fun);
    if (!is_value(a.arg) && pair_mentions(l.body, l.var)) return false;
    return true;
  }
  return false;
}

struct BoundStack {
  std::vector<std::string> names;

  bool blocks(const ExprPtr& candidate) const {
    for (const auto& n : names)
      if (occurs_free(n, candidate)) return true;
    return false;
  }
};

// Stage (ii): leftmost-outermost free deterministic redex.
bool scan_beta(const ExprPtr& e, BoundStack& bound, std::vector<int>& path) {
  if (!e->has_redex_form) return false;
  if (is_beta_redex(e) && !bound.blocks(e)) return true;
  bool found = false;
  auto child = [&](int idx, const ExprPtr& c) {
    if (found) return;
    path.push_back(idx);
    if (scan_beta(c, bound, path))
      found = true;
    else
      path.pop_back();
  };
  auto bound_child = [&](int idx, const std::string& var, const ExprPtr& c) {
    if (found) return;
    bound.names.push_back(var);
    child(idx, c);
    bound.names.pop_back();
  };
  std::visit(overloaded{
                 [&](const Pair& p) {
                   child(0, p.left);
                   child(1, p.right);
                   child(2, p.tag);
                 },
                 [&](const App& a) {
                   child(0, a.fun);
                   child(1, a.arg);
                 },
                 [&](const Lam& l) {
                   child(0, l.domain);
                   bound_child(1, l.var, l.body);
                 },
                 [&](const If& i) {
                   child(0, i.cond);
                   child(1, i.then_branch);
                   child(2, i.else_branch);
                 },
                 [&](const Proj& p) { child(0, p.target); },
                 [&](const Pi& p) {
                   child(0, p.domain);
                   bound_child(1, p.var, p.body);
                 },
                 [&](const Sigma& s) {
                   child(0, s.domain);
                   bound_child(1, s.var, s.body);
                 },
                 [&](const Random& r) { child(0, r.target); },
                 [&](const DispatchApp& d) {
                   // The argument is the scrutinee of the case list: visiting
                   // it first lets the dispatch resolve before the unselected
                   // case copies are entered.
                   child(static_cast<int>(2 * d.cases.size()), d.arg);
                   for (std::size_t i = 0; i < d.cases.size(); ++i) {
                     bound_child(static_cast<int>(2 * i), d.var, d.cases[i].type);
                     bound_child(static_cast<int>(2 * i + 1), d.var, d.cases[i].body);
                   }
                 },
                 [&](const auto&) {},
             },
             e->node);
  return found;
}

bool free_vars_bound(const ExprPtr& e, const Context& ctx, std::vector<std::string>& binders) {
  return std::visit(
      overloaded{
          [&](const Var& v) {
            return std::find(binders.begin(), binders.end(), v.name) != binders.end() ||
                   ctx.contains(v.name);
          },
          [&](const Pair& p) {
            return free_vars_bound(p.left, ctx, binders) &&
                   free_vars_bound(p.right, ctx, binders) &&
                   free_vars_bound(p.tag, ctx, binders);
          },
          [&](const App& a) {
            return free_vars_bound(a.fun, ctx, binders) && free_vars_bound(a.arg, ctx, binders);
          },
          [&](const Lam& l) {
            if (!free_vars_bound(l.domain, ctx, binders)) return false;
            binders.push_back(l.var);
            bool ok = free_vars_bound(l.body, ctx, binders);
            binders.pop_back();
            return ok;
          },
          [&](const If& i) {
            return free_vars_bound(i.cond, ctx, binders) &&
                   free_vars_bound(i.then_branch, ctx, binders) &&
                   free_vars_bound(i.else_branch, ctx, binders);
          },
          [&](const Proj& p) { return free_vars_bound(p.target, ctx, binders); },
          [&](const Pi& p) {
            if (!free_vars_bound(p.domain, ctx, binders)) return false;
            binders.push_back(p.var);
            bool ok = free_vars_bound(p.body, ctx, binders);
            binders.pop_back();
            return ok;
          },
          [&](const Sigma& s) {
            if (!free_vars_bound(s.domain, ctx, binders)) return false;
            binders.push_back(s.var);
            bool ok = free_vars_bound(s.body, ctx, binders);
            binders.pop_back();
            return ok;
          },
          [&](const Random& r) { return free_vars_bound(r.target, ctx, binders); },
          [&](const DispatchApp& d) {
            if (!free_vars_bound(d.arg, ctx, binders)) return false;
            binders.push_back(d.var);
            bool ok = true;
            for (const auto& c : d.cases)
              if (!free_vars_bound(c.type, ctx, binders) ||
                  !free_vars_bound(c.body, ctx, binders)) {
                ok = false;
                break;
              }
            binders.pop_back();
            return ok;
          },
          [&](const auto&) { return true; },
      },
      e->node);
}

// Is a dispatch node ready to resolve? Its argument must be deterministic and
// typable in the ambient context. The cheap free-variable screen avoids
// paying for an exception on every still-unbound argument probe.
bool dispatch_ready(const DispatchApp& d, const Context* ctx) {
  if (!is_deterministic(d.arg)) return false;
  if (!ctx) return false;
  std::vector<std::string> binders;
  if (!free_vars_bound(d.arg, *ctx, binders)) return false;
  try {
    infer_type(*ctx, d.arg);
    return true;
  } catch (const Error&) {
    return false;
  }
}

// Stage (i): leftmost-outermost Random or ready dispatch (no freeness condition).
bool scan_prob(const ExprPtr& e, const Context* ctx, std::vector<int>& path,
               detail::RedexKind& kind) {
  if (is_deterministic(e)) return false;
  if (is<Random>(e)) {
    kind = detail::RedexKind::Random;
    return true;
  }
  if (is<DispatchApp>(e) && dispatch_ready(as<DispatchApp>(e), ctx)) {
    kind = detail::RedexKind::Dispatch;
    return true;
  }
  bool found = false;
  auto child = [&](int idx, const ExprPtr& c) {
    if (found) return;
    path.push_back(idx);
    if (scan_prob(c, ctx, path, kind))
      found = true;
    else
      path.pop_back();
  };
  std::visit(overloaded{
                 [&](const Pair& p) {
                   child(0, p.left);
                   child(1, p.right);
                   child(2, p.tag);
                 },
                 [&](const App& a) {
                   child(0, a.fun);
                   child(1, a.arg);
                 },
                 [&](const Lam& l) {
                   child(0, l.domain);
                   child(1, l.body);
                 },
                 [&](const If& i) {
                   child(0, i.cond);
                   child(1, i.then_branch);
                   child(2, i.else_branch);
                 },
                 [&](const Proj& p) { child(0, p.target); },
                 [&](const Pi& p) {
                   child(0, p.domain);
                   child(1, p.body);
                 },
                 [&](const Sigma& s) {
                   child(0, s.domain);
                   child(1, s.body);
                 },
                 [&](const Random& r) { child(0, r.target); },
                 [&](const DispatchApp& d) {
                   child(static_cast<int>(2 * d.cases.size()), d.arg);
                   for (std::size_t i = 0; i < d.cases.size(); ++i) {
                     child(static_cast<int>(2 * i), d.cases[i].type);
                     child(static_cast<int>(2 * i + 1), d.cases[i].body);
                   }
                 },
                 [&](const auto&) {},
             },
             e->node);
  return found;
}

}  // namespace

namespace detail {

std::optional<RedexInfo> find_redex(const ExprPtr& e, bool prob_mode, const Context* ctx) {
  if (prob_mode) {
    std::vector<int> path;
    RedexKind kind;
    if (scan_prob(e, ctx, path, kind)) return RedexInfo{std::move(path), kind};
  }
  std::vector<int> path;
  BoundStack bound;
  if (scan_beta(e, bound, path)) return RedexInfo{std::move(path), RedexKind::Beta};
  return std::nullopt;
}

ExprPtr get_at(const ExprPtr& root, const std::vector<int>& path) {
  ExprPtr cur = root;
  for (int idx : path) {
    cur = std::visit(
        overloaded{
            [&](const Pair& p) { return idx == 0 ? p.left : idx == 1 ? p.right : p.tag; },
            [&](const App& a) { return idx == 0 ? a.fun : a.arg; },
            [&](const Lam& l) { return idx == 0 ? l.domain : l.body; },
            [&](const If& i) {
              return idx == 0 ? i.cond : idx == 1 ? i.then_branch : i.else_branch;
            },
            [&](const Proj& p) { return p.target; },
            [&](const Pi& p) { return idx == 0 ? p.domain : p.body; },
            [&](const Sigma& s) { return idx == 0 ? s.domain : s.body; },
            [&](const Random& r) { return r.target; },
            [&](const DispatchApp& d) {
              int n = static_cast<int>(d.cases.size());
              if (idx == 2 * n) return d.arg;
              return idx % 2 == 0 ? d.cases[idx / 2].type : d.cases[idx / 2].body;
            },
            [&](const auto&) -> ExprPtr { throw Error("bad redex path"); },
        },
        cur->node);
  }
  return cur;
}

ExprPtr replace_at(const ExprPtr& root, const std::vector<int>& path, const ExprPtr& repl) {
  if (path.empty()) return repl;
  std::vector<int> rest(path.begin() + 1, path.end());
  int idx = path[0];
  return std::visit(
      overloaded{
          [&](const Pair& p) {
            return mk_pair(idx == 0 ? replace_at(p.left, rest, repl) : p.left,
                           idx == 1 ? replace_at(p.right, rest, repl) : p.right,
                           idx == 2 ? replace_at(p.tag, rest, repl) : p.tag);
          },
          [&](const App& a) {
            return mk_app(idx == 0 ? replace_at(a.fun, rest, repl) : a.fun,
                          idx == 1 ? replace_at(a.arg, rest, repl) : a.arg);
          },
          [&](const Lam& l) {
            return mk_lam(l.var, idx == 0 ? replace_at(l.domain, rest, repl) : l.domain,
                          idx == 1 ? replace_at(l.body, rest, repl) : l.body);
          },
          [&](const If& i) {
            return mk_if(idx == 0 ? replace_at(i.cond, rest, repl) : i.cond,
                         idx == 1 ? replace_at(i.then_branch, rest, repl) : i.then_branch,
                         idx == 2 ? replace_at(i.else_branch, rest, repl) : i.else_branch);
          },
          [&](const Proj& p) { return mk_proj(p.index, replace_at(p.target, rest, repl)); },
          [&](const Pi& p) {
            return mk_pi(p.var, idx == 0 ? replace_at(p.domain, rest, repl) : p.domain,
                         idx == 1 ? replace_at(p.body, rest, repl) : p.body);
          },
          [&](const Sigma& s) {
            return mk_sigma(s.var, idx == 0 ? replace_at(s.domain, rest, repl) : s.domain,
                            idx == 1 ? replace_at(s.body, rest, repl) : s.body);
          },
          [&](const Random& r) { return mk_random(r.rho, replace_at(r.target, rest, repl)); },
          [&](const DispatchApp& d) {
            int n = static_cast<int>(d.cases.size());
            auto cases = d.cases;
            ExprPtr arg = d.arg;
            if (idx == 2 * n) {
              arg = replace_at(arg, rest, repl);
            } else if (idx % 2 == 0) {
              cases[idx / 2].type = replace_at(cases[idx / 2].type, rest, repl);
            } else {
              cases[idx / 2].body = replace_at(cases[idx / 2].body, rest, repl);
            }
            return mk_dispatch(d.var, std::move(cases), arg);
          },
          [&](const auto&) -> ExprPtr { throw Error("bad redex path"); },
      },
      root->node);
}

std::vector<std::pair<double, ExprPtr>> contract(const Context& ctx, const ExprPtr& root,
                                                 const RedexInfo& info) {
  ExprPtr e = get_at(root, info.path);
  std::vector<std::pair<double, ExprPtr>> out;
  switch (info.kind) {
    case RedexKind::Beta: {
      ExprPtr result;
      if (is<Proj>(e)) {
        const auto& p = as<Proj>(e);
        result = p.index == 1 ? as<Pair>(p.target).left : as<Pair>(p.target).right;
      } else if (is<If>(e)) {
        const auto& i = as<If>(e);
        result = as<Const>(i.cond).k == ConstKind::True ? i.then_branch : i.else_branch;
      } else {
        const auto& a = as<App>(e);
        const auto& l = as<Lam>(a.fun);
        result = substitute(l.body, l.var, a.arg);
      }
      out.emplace_back(1.0, replace_at(root, info.path, result));
      break;
    }
    case RedexKind::Random: {
      const auto& r = as<Random>(e);
      out.emplace_back(r.rho, replace_at(root, info.path, mk_app(r.target, e_true())));
      out.emplace_back(1.0 - r.rho, replace_at(root, info.path, mk_app(r.target, e_false())));
      break;
    }
    case RedexKind::Dispatch: {
      const auto& d = as<DispatchApp>(e);
      ExprPtr arg_ty = infer_type(ctx, d.arg);
      const DispatchCase* match = nullptr;
      for (const auto& c : d.cases) {
        if (alpha_eq(normalize(c.type, default_fuel(c.type)), arg_ty)) {
          if (match) throw DispatchAmbiguous("argument type " + print(arg_ty) +
                                             " matches more than one case");
          match = &c;
        }
      }
      if (!match)
        throw DispatchNoMatch("no case for argument type " + print(arg_ty));
      ExprPtr lam = mk_lam(d.var, match->type, match->body);
      out.emplace_back(1.0, replace_at(root, info.path, mk_app(lam, d.arg)));
      break;
    }
  }
  return out;
}

}  // namespace detail

Judgment Judgment::derive(const Context& ctx, const ExprPtr& term) {
  return Judgment(ctx, term, infer_type(ctx, term));
}

std::uint64_t default_fuel(const ExprPtr& e) {
  std::uint64_t s = e->size;
  return 10 * s * s + 1024;
}

std::optional<ExprPtr> step_beta(const ExprPtr& e) {
  if (!is_deterministic(e))
    throw Error("step_beta requires a deterministic expression");
  auto info = detail::find_redex(e, /*prob_mode=*/false, nullptr);
  if (!info) return std::nullopt;
  Context empty;
  return detail::contract(empty, e, *info)[0].second;
}

ExprPtr normalize(const ExprPtr& e, std::uint64_t fuel) {
  ExprPtr cur = e;
  for (std::uint64_t i = 0; i <= fuel; ++i) {
    if (!cur->has_redex_form) return cur;
    auto next = step_beta(cur);
    if (!next) return cur;
    cur = *next;
  }
  throw FuelExhausted("normalization did not finish within " + std::to_string(fuel) + " steps");
}

bool is_normal(const ExprPtr& e) {
  if (!is_deterministic(e)) return false;
  if (!e->has_redex_form) return true;
  return !detail::find_redex(e, false, nullptr).has_value();
}

bool is_sort(const ExprPtr& e) { return is<Sort>(e); }

namespace {

// Borrowed base context plus a local binder stack, so descending under a
// binder never copies the context.
struct InferCtx {
  const Context& base;
  std::vector<Context::Entry> locals;

  const ExprPtr* lookup(const std::string& name) const {
    for (auto it = locals.rbegin(); it != locals.rend(); ++it)
      if (it->name == name) return &it->type;
    return base.lookup(name);
  }
  bool contains(const std::string& name) const { return lookup(name) != nullptr; }
};

// Binder names already in scope get alpha-renamed before extension.
std::pair<std::string, ExprPtr> open_binder(const InferCtx& ctx, const std::string& var,
                                            const ExprPtr& body) {
  if (!ctx.contains(var)) return {var, body};
  std::set<std::string> avoid = free_vars(body);
  for (const auto& en : ctx.base.entries()) avoid.insert(en.name);
  for (const auto& en : ctx.locals) avoid.insert(en.name);
  std::string fresh = fresh_name(var, avoid);
  return {fresh, substitute(body, var, mk_var(fresh))};
}

struct BinderScope {
  InferCtx& ctx;
  BinderScope(InferCtx& c, std::string name, ExprPtr type) : ctx(c) {
    ctx.locals.push_back(Context::Entry{std::move(name), std::move(type)});
  }
  ~BinderScope() { ctx.locals.pop_back(); }
};

ExprPtr infer(InferCtx& ctx, const ExprPtr& e);

ExprPtr infer_sort(InferCtx& ctx, const ExprPtr& e, const char* rule) {
  ExprPtr s = infer(ctx, e);
  if (!is_sort(s)) throw NotTypable(rule, print(e) + " is not a type or kind");
  return s;
}

void require_star(const ExprPtr& sa, const char* rule) {
  if (!is<Sort>(sa) || as<Sort>(sa).s != SortKind::Star)
    throw NotTypable(rule, "binder domain must be a type, got " + print(sa));
}

ExprPtr infer(InferCtx& ctx, const ExprPtr& e) {
  return std::visit(
      overloaded{
          [&](const Const& c) -> ExprPtr {
            switch (c.k) {
              case ConstKind::One: return e_unit_type();
              case ConstKind::True:
              case ConstKind::False: return e_bool_type();
              case ConstKind::UnitType:
              case ConstKind::BoolType: return e_star();
            }
            throw NotTypable("axioms", "unknown constant");
          },
          [&](const Sort& s) -> ExprPtr {
            if (s.s == SortKind::Star) return e_box();
            throw NotTypable("axioms", "Box has no type");
          },
          [&](const Var& v) -> ExprPtr {
            const ExprPtr* ty = ctx.lookup(v.name);
            if (!ty) throw UnboundVariable(v.name);
            return normalize(*ty, default_fuel(*ty));
          },
          [&](const Pi& p) -> ExprPtr {
            require_star(infer_sort(ctx, p.domain, "formation"), "formation");
            auto [var, body] = open_binder(ctx, p.var, p.body);
            BinderScope scope(ctx, var, p.domain);
            return infer_sort(ctx, body, "formation");
          },
          [&](const Sigma& s) -> ExprPtr {
            require_star(infer_sort(ctx, s.domain, "formation"), "formation");
            auto [var, body] = open_binder(ctx, s.var, s.body);
            BinderScope scope(ctx, var, s.domain);
            return infer_sort(ctx, body, "formation");
          },
          [&](const Lam& l) -> ExprPtr {
            require_star(infer_sort(ctx, l.domain, "abstraction"), "abstraction");
            auto [var, body] = open_binder(ctx, l.var, l.body);
            BinderScope scope(ctx, var, l.domain);
            ExprPtr bt = infer(ctx, body);
            // The product over the inferred body type must itself be formable.
            infer_sort(ctx, bt, "abstraction");
            ExprPtr pi = mk_pi(var, l.domain, bt);
            return normalize(pi, default_fuel(pi));
          },
          [&](const App& a) -> ExprPtr {
            ExprPtr ft = infer(ctx, a.fun);
            if (!is<Pi>(ft))
              throw NotTypable("application", print(a.fun) + " : " + print(ft) +
                                                  " is not a function");
            const auto& pi = as<Pi>(ft);
            ExprPtr at = infer(ctx, a.arg);
            if (!alpha_eq(pi.domain, at))
              throw NotTypable("application", "argument type " + print(at) +
                                                  " does not match domain " + print(pi.domain));
            ExprPtr result;
            try {
              result = substitute(pi.body, pi.var, a.arg);
            } catch (const PairSubstitutionViolation& err) {
              throw NotTypable("application", err.what());
            }
            return normalize(result, default_fuel(result));
          },
          [&](const If& i) -> ExprPtr {
            ExprPtr ct = infer(ctx, i.cond);
            if (!alpha_eq(ct, e_bool_type()))
              throw NotTypable("if", "condition has type " + print(ct));
            ExprPtr t1 = infer(ctx, i.then_branch);
            ExprPtr t2 = infer(ctx, i.else_branch);
            if (alpha_eq(t1, t2)) return t1;
            ExprPtr motive = mk_if(i.cond, t1, t2);
            return normalize(motive, default_fuel(motive));
          },
          [&](const Proj& p) -> ExprPtr {
            ExprPtr st = infer(ctx, p.target);
            if (!is<Sigma>(st))
              throw NotTypable("products", print(p.target) + " : " + print(st) +
                                               " is not a pair type");
            const auto& sig = as<Sigma>(st);
            if (p.index == 1) return sig.domain;
            ExprPtr result;
            try {
              result = substitute(sig.body, sig.var, mk_proj(1, p.target));
            } catch (const PairSubstitutionViolation& err) {
              throw NotTypable("products", err.what());
            }
            return normalize(result, default_fuel(result));
          },
          [&](const Pair& pr) -> ExprPtr {
            ExprPtr tag = normalize(pr.tag, default_fuel(pr.tag));
            if (!is<Sigma>(tag))
              throw NotTypable("products", "pair tag " + print(pr.tag) + " is not a pair type");
            infer_sort(ctx, tag, "products");
            const auto& sig = as<Sigma>(tag);
            ExprPtr lt = infer(ctx, pr.left);
            if (!alpha_eq(lt, normalize(sig.domain, default_fuel(sig.domain))))
              throw NotTypable("products", "first component has type " + print(lt) +
                                               ", tag expects " + print(sig.domain));
            ExprPtr expected = substitute(sig.body, sig.var, pr.left);
            expected = normalize(expected, default_fuel(expected));
            ExprPtr rt = infer(ctx, pr.right);
            if (!alpha_eq(rt, expected))
              throw NotTypable("products", "second component has type " + print(rt) +
                                               ", tag expects " + print(expected));
            return tag;
          },
          [&](const Random&) -> ExprPtr {
            throw NotTypable("syntax", "random is not a deterministic expression");
          },
          [&](const DispatchApp&) -> ExprPtr {
            throw NotTypable("syntax", "case dispatch is not a deterministic expression");
          },
      },
      e->node);
}

}  // namespace

ExprPtr infer_type(const Context& ctx, const ExprPtr& e) {
  InferCtx ic{ctx, {}};
  return infer(ic, e);
}

bool beta_equiv(const ExprPtr& a, const ExprPtr& b, std::uint64_t fuel) {
  return alpha_eq(normalize(a, fuel), normalize(b, fuel));
}

bool check_judgment(const Context& ctx, const ExprPtr& e, const ExprPtr& ty) {
  try {
    ExprPtr inferred = infer_type(ctx, e);
    return alpha_eq(inferred, normalize(ty, default_fuel(ty)));
  } catch (const NotTypable&) {
    return false;
  } catch (const UnboundVariable&) {
    return false;
  }
}

void validate_context(const Context& ctx) {
  Context prefix;
  for (const auto& en : ctx.entries()) {
    ExprPtr s = infer_type(prefix, en.type);
    if (!is_sort(s))
      throw NotTypable("context", en.name + " : " + print(en.type) + " is not well-sorted");
    prefix.push(en.name, en.type);
  }
}

}  // namespace pdts
