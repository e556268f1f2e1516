#include "pdts/expr.hpp"

#include <algorithm>
#include <charconv>
#include <map>

namespace pdts {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ExprPtr finish(Expr::Node node) {
  auto e = std::make_shared<Expr>(std::move(node));
  Expr& m = const_cast<Expr&>(*e);
  auto acc = [&](const ExprPtr& c) {
    m.deterministic = m.deterministic && c->deterministic;
    m.has_redex_form = m.has_redex_form || c->has_redex_form;
    m.size += c->size;
    m.name_bloom |= c->name_bloom;
  };
  std::visit(overloaded{
                 [&](const Const&) {},
                 [&](const Sort&) {},
                 [&](const Var& v) { m.name_bloom |= name_bloom_bit(v.name); },
                 [&](const Pair& p) {
                   acc(p.left);
                   acc(p.right);
                   acc(p.tag);
                 },
                 [&](const App& a) {
                   acc(a.fun);
                   acc(a.arg);
                   if (std::holds_alternative<Lam>(a.fun->node)) m.has_redex_form = true;
                 },
                 [&](const Lam& l) {
                   acc(l.domain);
                   acc(l.body);
                 },
                 [&](const If& i) {
                   acc(i.cond);
                   acc(i.then_branch);
                   acc(i.else_branch);
                   if (std::holds_alternative<Const>(i.cond->node)) {
                     ConstKind k = std::get<Const>(i.cond->node).k;
                     if (k == ConstKind::True || k == ConstKind::False) m.has_redex_form = true;
                   }
                 },
                 [&](const Proj& p) {
                   acc(p.target);
                   if (std::holds_alternative<Pair>(p.target->node)) m.has_redex_form = true;
                 },
                 [&](const Pi& p) {
                   acc(p.domain);
                   acc(p.body);
                 },
                 [&](const Sigma& s) {
                   acc(s.domain);
                   acc(s.body);
                 },
                 [&](const Random& r) {
                   acc(r.target);
                   m.deterministic = false;
                 },
                 [&](const DispatchApp& d) {
                   for (const auto& c : d.cases) {
                     acc(c.type);
                     acc(c.body);
                   }
                   acc(d.arg);
                   m.deterministic = false;
                 },
             },
             e->node);
  return e;
}

}  // namespace

std::uint64_t name_bloom_bit(const std::string& name) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return 1ull << (h & 63u);
}

ExprPtr mk_const(ConstKind k) { return finish(Const{k}); }
ExprPtr mk_sort(SortKind s) { return finish(Sort{s}); }
ExprPtr mk_var(std::string name) { return finish(Var{std::move(name)}); }

ExprPtr mk_pair(ExprPtr left, ExprPtr right, ExprPtr tag) {
  if (!is_value(left) || !is_value(right))
    throw Error("pair components must be values");
  return finish(Pair{std::move(left), std::move(right), std::move(tag)});
}

ExprPtr mk_app(ExprPtr fun, ExprPtr arg) { return finish(App{std::move(fun), std::move(arg)}); }

ExprPtr mk_lam(std::string var, ExprPtr domain, ExprPtr body) {
  return finish(Lam{std::move(var), std::move(domain), std::move(body)});
}

ExprPtr mk_if(ExprPtr cond, ExprPtr then_branch, ExprPtr else_branch) {
  return finish(If{std::move(cond), std::move(then_branch), std::move(else_branch)});
}

ExprPtr mk_proj(int index, ExprPtr target) {
  if (index != 1 && index != 2) throw Error("projection index must be 1 or 2");
  return finish(Proj{index, std::move(target)});
}

ExprPtr mk_pi(std::string var, ExprPtr domain, ExprPtr body) {
  return finish(Pi{std::move(var), std::move(domain), std::move(body)});
}

ExprPtr mk_sigma(std::string var, ExprPtr domain, ExprPtr body) {
  return finish(Sigma{std::move(var), std::move(domain), std::move(body)});
}

ExprPtr mk_random(double rho, ExprPtr target) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error("random weight must lie strictly in (0,1)");
  return finish(Random{rho, std::move(target)});
}

ExprPtr mk_dispatch(std::string var, std::vector<DispatchCase> cases, ExprPtr arg) {
  if (cases.empty()) throw Error("dispatch requires at least one case");
  return finish(DispatchApp{std::move(var), std::move(cases), std::move(arg)});
}

#define PDTS_SHARED_CONST(fn, make)          \
  const ExprPtr& fn() {                      \
    static const ExprPtr e = make;           \
    return e;                                \
  }

PDTS_SHARED_CONST(e_one, mk_const(ConstKind::One))
PDTS_SHARED_CONST(e_true, mk_const(ConstKind::True))
PDTS_SHARED_CONST(e_false, mk_const(ConstKind::False))
PDTS_SHARED_CONST(e_unit_type, mk_const(ConstKind::UnitType))
PDTS_SHARED_CONST(e_bool_type, mk_const(ConstKind::BoolType))
PDTS_SHARED_CONST(e_star, mk_sort(SortKind::Star))
PDTS_SHARED_CONST(e_box, mk_sort(SortKind::Box))

#undef PDTS_SHARED_CONST

bool is_value(const ExprPtr& e) {
  return std::visit(overloaded{
                        [](const Const&) { return true; },
                        [](const Sort&) { return true; },
                        [](const Var&) { return true; },
                        [](const Pair& p) { return is_value(p.left) && is_value(p.right); },
                        [](const auto&) { return false; },
                    },
                    e->node);
}

namespace {

bool occurs_bit(const std::string& name, std::uint64_t bit, const ExprPtr& e) {
  if (!(e->name_bloom & bit)) return false;
  return std::visit(
      overloaded{
          [](const Const&) { return false; },
          [](const Sort&) { return false; },
          [&](const Var& v) { return v.name == name; },
          [&](const Pair& p) {
            return occurs_bit(name, bit, p.left) || occurs_bit(name, bit, p.right) ||
                   occurs_bit(name, bit, p.tag);
          },
          [&](const App& a) {
            return occurs_bit(name, bit, a.fun) || occurs_bit(name, bit, a.arg);
          },
          [&](const Lam& l) {
            return occurs_bit(name, bit, l.domain) ||
                   (l.var != name && occurs_bit(name, bit, l.body));
          },
          [&](const If& i) {
            return occurs_bit(name, bit, i.cond) || occurs_bit(name, bit, i.then_branch) ||
                   occurs_bit(name, bit, i.else_branch);
          },
          [&](const Proj& p) { return occurs_bit(name, bit, p.target); },
          [&](const Pi& p) {
            return occurs_bit(name, bit, p.domain) ||
                   (p.var != name && occurs_bit(name, bit, p.body));
          },
          [&](const Sigma& s) {
            return occurs_bit(name, bit, s.domain) ||
                   (s.var != name && occurs_bit(name, bit, s.body));
          },
          [&](const Random& r) { return occurs_bit(name, bit, r.target); },
          [&](const DispatchApp& d) {
            if (occurs_bit(name, bit, d.arg)) return true;
            if (d.var == name) return false;
            for (const auto& c : d.cases)
              if (occurs_bit(name, bit, c.type) || occurs_bit(name, bit, c.body)) return true;
            return false;
          },
      },
      e->node);
}

}  // namespace

bool occurs_free(const std::string& name, const ExprPtr& e) {
  return occurs_bit(name, name_bloom_bit(name), e);
}

namespace {

void collect_free(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(overloaded{
                 [](const Const&) {},
                 [](const Sort&) {},
                 [&](const Var& v) {
                   if (!bound.count(v.name)) out.insert(v.name);
                 },
                 [&](const Pair& p) {
                   collect_free(p.left, bound, out);
                   collect_free(p.right, bound, out);
                   collect_free(p.tag, bound, out);
                 },
                 [&](const App& a) {
                   collect_free(a.fun, bound, out);
                   collect_free(a.arg, bound, out);
                 },
                 [&](const Lam& l) {
                   collect_free(l.domain, bound, out);
                   bool fresh = bound.insert(l.var).second;
                   collect_free(l.body, bound, out);
                   if (fresh) bound.erase(l.var);
                 },
                 [&](const If& i) {
                   collect_free(i.cond, bound, out);
                   collect_free(i.then_branch, bound, out);
                   collect_free(i.else_branch, bound, out);
                 },
                 [&](const Proj& p) { collect_free(p.target, bound, out); },
                 [&](const Pi& p) {
                   collect_free(p.domain, bound, out);
                   bool fresh = bound.insert(p.var).second;
                   collect_free(p.body, bound, out);
                   if (fresh) bound.erase(p.var);
                 },
                 [&](const Sigma& s) {
                   collect_free(s.domain, bound, out);
                   bool fresh = bound.insert(s.var).second;
                   collect_free(s.body, bound, out);
                   if (fresh) bound.erase(s.var);
                 },
                 [&](const Random& r) { collect_free(r.target, bound, out); },
                 [&](const DispatchApp& d) {
                   collect_free(d.arg, bound, out);
                   bool fresh = bound.insert(d.var).second;
                   for (const auto& c : d.cases) {
                     collect_free(c.type, bound, out);
                     collect_free(c.body, bound, out);
                   }
                   if (fresh) bound.erase(d.var);
                 },
             },
             e->node);
}

}  // namespace

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> bound, out;
  collect_free(e, bound, out);
  return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  // Strip a trailing _<digits> so renaming the same variable twice stays tidy.
  std::string stem = base;
  auto pos = stem.rfind('_');
  if (pos != std::string::npos && pos + 1 < stem.size() &&
      std::all_of(stem.begin() + pos + 1, stem.end(), [](char c) { return c >= '0' && c <= '9'; }))
    stem = stem.substr(0, pos);
  if (stem.empty()) stem = "v";
  for (int i = 1;; ++i) {
    std::string cand = stem + "_" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

namespace {

// Single-pass capture-avoiding substitution. Unchanged subtrees are returned
// by pointer, so untouched structure stays shared and the pass stays linear;
// the name filter prunes whole subtrees that cannot mention x.
ExprPtr subst(const ExprPtr& e, const std::string& x, const ExprPtr& v) {
  if (!(e->name_bloom & name_bloom_bit(x))) return e;
  return std::visit(
      overloaded{
          [&](const Var& var) { return var.name == x ? v : e; },
          [&](const Pair& p) {
            ExprPtr l = subst(p.left, x, v);
            ExprPtr r = subst(p.right, x, v);
            ExprPtr t = subst(p.tag, x, v);
            if (l == p.left && r == p.right && t == p.tag) return e;
            if (!is_value(v) && (l != p.left || r != p.right))
              throw PairSubstitutionViolation(
                  "substituting a non-value into a pair component");
            return mk_pair(l, r, t);
          },
          [&](const App& a) {
            ExprPtr f = subst(a.fun, x, v);
            ExprPtr g = subst(a.arg, x, v);
            return f == a.fun && g == a.arg ? e : mk_app(f, g);
          },
          [&](const Lam& l) {
            ExprPtr dom = subst(l.domain, x, v);
            if (l.var == x) return dom == l.domain ? e : mk_lam(l.var, dom, l.body);
            if (occurs_free(l.var, v) && occurs_free(x, l.body)) {
              auto avoid = free_vars(v);
              auto fv = free_vars(l.body);
              avoid.insert(fv.begin(), fv.end());
              avoid.insert(x);
              std::string nv = fresh_name(l.var, avoid);
              ExprPtr body = subst(l.body, l.var, mk_var(nv));
              return mk_lam(nv, dom, subst(body, x, v));
            }
            ExprPtr body = subst(l.body, x, v);
            return dom == l.domain && body == l.body ? e : mk_lam(l.var, dom, body);
          },
          [&](const If& i) {
            ExprPtr c = subst(i.cond, x, v);
            ExprPtr t = subst(i.then_branch, x, v);
            ExprPtr f = subst(i.else_branch, x, v);
            return c == i.cond && t == i.then_branch && f == i.else_branch ? e : mk_if(c, t, f);
          },
          [&](const Proj& p) {
            ExprPtr t = subst(p.target, x, v);
            return t == p.target ? e : mk_proj(p.index, t);
          },
          [&](const Pi& p) {
            ExprPtr dom = subst(p.domain, x, v);
            if (p.var == x) return dom == p.domain ? e : mk_pi(p.var, dom, p.body);
            if (occurs_free(p.var, v) && occurs_free(x, p.body)) {
              auto avoid = free_vars(v);
              auto fv = free_vars(p.body);
              avoid.insert(fv.begin(), fv.end());
              avoid.insert(x);
              std::string nv = fresh_name(p.var, avoid);
              ExprPtr body = subst(p.body, p.var, mk_var(nv));
              return mk_pi(nv, dom, subst(body, x, v));
            }
            ExprPtr body = subst(p.body, x, v);
            return dom == p.domain && body == p.body ? e : mk_pi(p.var, dom, body);
          },
          [&](const Sigma& s) {
            ExprPtr dom = subst(s.domain, x, v);
            if (s.var == x) return dom == s.domain ? e : mk_sigma(s.var, dom, s.body);
            if (occurs_free(s.var, v) && occurs_free(x, s.body)) {
              auto avoid = free_vars(v);
              auto fv = free_vars(s.body);
              avoid.insert(fv.begin(), fv.end());
              avoid.insert(x);
              std::string nv = fresh_name(s.var, avoid);
              ExprPtr body = subst(s.body, s.var, mk_var(nv));
              return mk_sigma(nv, dom, subst(body, x, v));
            }
            ExprPtr body = subst(s.body, x, v);
            return dom == s.domain && body == s.body ? e : mk_sigma(s.var, dom, body);
          },
          [&](const Random& r) {
            ExprPtr t = subst(r.target, x, v);
            return t == r.target ? e : mk_random(r.rho, t);
          },
          [&](const DispatchApp& d) {
            ExprPtr arg = subst(d.arg, x, v);
            if (d.var == x)
              return arg == d.arg ? e : mk_dispatch(d.var, d.cases, arg);
            std::string var = d.var;
            std::vector<DispatchCase> cases = d.cases;
            bool changed = arg != d.arg;
            bool capture = false;
            if (occurs_free(d.var, v)) {
              for (const auto& c : d.cases)
                if (occurs_free(x, c.type) || occurs_free(x, c.body)) capture = true;
            }
            if (capture) {
              std::set<std::string> avoid = free_vars(v);
              for (const auto& c : cases) {
                auto f1 = free_vars(c.type);
                auto f2 = free_vars(c.body);
                avoid.insert(f1.begin(), f1.end());
                avoid.insert(f2.begin(), f2.end());
              }
              avoid.insert(x);
              var = fresh_name(d.var, avoid);
              ExprPtr nv = mk_var(var);
              for (auto& c : cases) {
                c.type = subst(c.type, d.var, nv);
                c.body = subst(c.body, d.var, nv);
              }
              changed = true;
            }
            for (auto& c : cases) {
              ExprPtr ty = subst(c.type, x, v);
              ExprPtr body = subst(c.body, x, v);
              if (ty != c.type || body != c.body) changed = true;
              c.type = ty;
              c.body = body;
            }
            return changed ? mk_dispatch(var, std::move(cases), arg) : e;
          },
          [&](const auto&) { return e; },
      },
      e->node);
}

// Canonical serialization: bound variables printed as binder depth, free
// variables by name. Alpha-equivalent expressions serialize identically.
void key(const ExprPtr& e, std::map<std::string, std::vector<int>>& env, int depth,
         std::string& out) {
  auto with_binder = [&](const std::string& var, const ExprPtr& body) {
    env[var].push_back(depth);
    key(body, env, depth + 1, out);
    env[var].pop_back();
    if (env[var].empty()) env.erase(var);
  };
  std::visit(overloaded{
                 [&](const Const& c) {
                   out += 'c';
                   out += static_cast<char>('0' + static_cast<int>(c.k));
                 },
                 [&](const Sort& s) { out += s.s == SortKind::Star ? "s*" : "s#"; },
                 [&](const Var& v) {
                   auto it = env.find(v.name);
                   if (it != env.end() && !it->second.empty()) {
                     out += '#';
                     out += std::to_string(it->second.back());
                   } else {
                     out += 'v';
                     out += v.name;
                   }
                   out += ';';
                 },
                 [&](const Pair& p) {
                   out += "P(";
                   key(p.left, env, depth, out);
                   key(p.right, env, depth, out);
                   key(p.tag, env, depth, out);
                   out += ')';
                 },
                 [&](const App& a) {
                   out += "A(";
                   key(a.fun, env, depth, out);
                   key(a.arg, env, depth, out);
                   out += ')';
                 },
                 [&](const Lam& l) {
                   out += "L(";
                   key(l.domain, env, depth, out);
                   with_binder(l.var, l.body);
                   out += ')';
                 },
                 [&](const If& i) {
                   out += "I(";
                   key(i.cond, env, depth, out);
                   key(i.then_branch, env, depth, out);
                   key(i.else_branch, env, depth, out);
                   out += ')';
                 },
                 [&](const Proj& p) {
                   out += p.index == 1 ? "p1(" : "p2(";
                   key(p.target, env, depth, out);
                   out += ')';
                 },
                 [&](const Pi& p) {
                   out += "F(";
                   key(p.domain, env, depth, out);
                   with_binder(p.var, p.body);
                   out += ')';
                 },
                 [&](const Sigma& s) {
                   out += "S(";
                   key(s.domain, env, depth, out);
                   with_binder(s.var, s.body);
                   out += ')';
                 },
                 [&](const Random& r) {
                   out += "R[";
                   char buf[32];
                   auto res = std::to_chars(buf, buf + sizeof buf, r.rho);
                   out.append(buf, res.ptr);
                   out += "](";
                   key(r.target, env, depth, out);
                   out += ')';
                 },
                 [&](const DispatchApp& d) {
                   out += "D(";
                   env[d.var].push_back(depth);
                   for (const auto& c : d.cases) {
                     key(c.type, env, depth + 1, out);
                     out += "=>";
                     key(c.body, env, depth + 1, out);
                     out += ';';
                   }
                   env[d.var].pop_back();
                   if (env[d.var].empty()) env.erase(d.var);
                   key(d.arg, env, depth, out);
                   out += ')';
                 },
             },
             e->node);
}

}  // namespace

ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& v) {
  return subst(e, x, v);
}

std::string alpha_key(const ExprPtr& e) {
  std::string out;
  out.reserve(e->size * 4);
  std::map<std::string, std::vector<int>> env;
  key(e, env, 0, out);
  return out;
}

namespace {

using RenameEnv = std::vector<std::pair<std::string, std::string>>;

bool var_match(const std::string& a, const std::string& b, const RenameEnv& env) {
  for (auto it = env.rbegin(); it != env.rend(); ++it) {
    if (it->first == a) return it->second == b;
    if (it->second == b) return false;
  }
  return a == b;
}

bool aeq(const ExprPtr& a, const ExprPtr& b, RenameEnv& env) {
  if (a == b && env.empty()) return true;
  if (a->node.index() != b->node.index()) return false;
  if (a->size != b->size) return false;
  return std::visit(
      overloaded{
          [&](const Const& ca) { return ca.k == as<Const>(b).k; },
          [&](const Sort& sa) { return sa.s == as<Sort>(b).s; },
          [&](const Var& va) { return var_match(va.name, as<Var>(b).name, env); },
          [&](const Pair& pa) {
            const auto& pb = as<Pair>(b);
            return aeq(pa.left, pb.left, env) && aeq(pa.right, pb.right, env) &&
                   aeq(pa.tag, pb.tag, env);
          },
          [&](const App& aa) {
            const auto& ab = as<App>(b);
            return aeq(aa.fun, ab.fun, env) && aeq(aa.arg, ab.arg, env);
          },
          [&](const Lam& la) {
            const auto& lb = as<Lam>(b);
            if (!aeq(la.domain, lb.domain, env)) return false;
            env.emplace_back(la.var, lb.var);
            bool ok = aeq(la.body, lb.body, env);
            env.pop_back();
            return ok;
          },
          [&](const If& ia) {
            const auto& ib = as<If>(b);
            return aeq(ia.cond, ib.cond, env) && aeq(ia.then_branch, ib.then_branch, env) &&
                   aeq(ia.else_branch, ib.else_branch, env);
          },
          [&](const Proj& pa) {
            const auto& pb = as<Proj>(b);
            return pa.index == pb.index && aeq(pa.target, pb.target, env);
          },
          [&](const Pi& pa) {
            const auto& pb = as<Pi>(b);
            if (!aeq(pa.domain, pb.domain, env)) return false;
            env.emplace_back(pa.var, pb.var);
            bool ok = aeq(pa.body, pb.body, env);
            env.pop_back();
            return ok;
          },
          [&](const Sigma& sa) {
            const auto& sb = as<Sigma>(b);
            if (!aeq(sa.domain, sb.domain, env)) return false;
            env.emplace_back(sa.var, sb.var);
            bool ok = aeq(sa.body, sb.body, env);
            env.pop_back();
            return ok;
          },
          [&](const Random& ra) {
            const auto& rb = as<Random>(b);
            return ra.rho == rb.rho && aeq(ra.target, rb.target, env);
          },
          [&](const DispatchApp& da) {
            const auto& db = as<DispatchApp>(b);
            if (da.cases.size() != db.cases.size()) return false;
            if (!aeq(da.arg, db.arg, env)) return false;
            env.emplace_back(da.var, db.var);
            bool ok = true;
            for (std::size_t i = 0; ok && i < da.cases.size(); ++i)
              ok = aeq(da.cases[i].type, db.cases[i].type, env) &&
                   aeq(da.cases[i].body, db.cases[i].body, env);
            env.pop_back();
            return ok;
          },
      },
      a->node);
}

}  // namespace

bool alpha_eq(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (a->size != b->size) return false;
  RenameEnv env;
  return aeq(a, b, env);
}

void Context::push(std::string name, ExprPtr type) {
  if (contains(name)) throw DuplicateName(name);
  entries_.push_back(Entry{std::move(name), std::move(type)});
}

Context Context::extended(std::string name, ExprPtr type) const {
  Context out = *this;
  out.push(std::move(name), std::move(type));
  return out;
}

const ExprPtr* Context::lookup(const std::string& name) const {
  for (const auto& en : entries_)
    if (en.name == name) return &en.type;
  return nullptr;
}

std::string Context::alpha_key() const {
  std::string out;
  for (const auto& en : entries_) {
    out += en.name;
    out += ':';
    out += pdts::alpha_key(en.type);
    out += ',';
  }
  return out;
}

}  // namespace pdts
