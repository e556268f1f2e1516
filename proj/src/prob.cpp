#include "pdts/prob.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "pdts/printer.hpp"

namespace pdts {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Kahan {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

std::optional<RedexChoice> select_redex(const Context& ctx, const ExprPtr& e) {
  auto info = detail::find_redex(e, /*prob_mode=*/true, &ctx);
  if (!info) return std::nullopt;
  return RedexChoice{std::move(info->path), info->kind};
}

std::vector<WeightedStep> step_rho(const Context& ctx, const ExprPtr& e) {
  auto info = detail::find_redex(e, true, &ctx);
  std::vector<WeightedStep> out;
  if (!info) return out;
  for (auto& [w, result] : detail::contract(ctx, e, *info))
    out.push_back(WeightedStep{w, std::move(result)});
  return out;
}

SampleResult sample_reduce(const Context& ctx, const ExprPtr& e, std::uint64_t seed,
                           std::uint64_t fuel) {
  std::mt19937_64 rng(seed);
  ExprPtr cur = e;
  double log_prob = 0.0;
  std::uint64_t steps = 0;
  while (true) {
    auto alts = step_rho(ctx, cur);
    if (alts.empty()) {
      if (!is_normal(cur))
        throw StuckExpression("no permitted reduction for " + print(cur));
      return SampleResult{cur, log_prob, steps};
    }
    std::size_t pick = 0;
    if (alts.size() > 1) {
      // Two alternatives only ever arise from a Random redex.
      pick = uniform01(rng) < alts[0].probability ? 0 : 1;
      log_prob += std::log(alts[pick].probability);
    }
    cur = alts[pick].result;
    if (++steps > fuel)
      throw FuelExhausted("sampling exceeded " + std::to_string(fuel) + " steps");
  }
}

ReductionTree enumerate_tree(const Context& ctx, const ExprPtr& e, std::uint64_t fuel,
                             std::uint64_t leaf_cap) {
  ReductionTree root{e, {}};
  std::uint64_t leaves = 0;
  struct Frame {
    ReductionTree* node;
    std::uint64_t depth;
  };
  std::vector<Frame> work{{&root, 0}};
  while (!work.empty()) {
    Frame f = work.back();
    work.pop_back();
    auto alts = step_rho(ctx, f.node->expr);
    if (alts.empty()) {
      if (!is_normal(f.node->expr))
        throw StuckExpression("no permitted reduction for " + print(f.node->expr));
      if (++leaves > leaf_cap)
        throw LeafCapExceeded("reduction tree exceeds " + std::to_string(leaf_cap) + " leaves");
      continue;
    }
    if (f.depth >= fuel)
      throw FuelExhausted("reduction tree branch exceeded " + std::to_string(fuel) + " steps");
    for (auto& [w, result] : alts) {
      f.node->children.emplace_back(w, std::make_unique<ReductionTree>(ReductionTree{result, {}}));
      work.push_back({f.node->children.back().second.get(), f.depth + 1});
    }
  }
  return root;
}

std::vector<std::pair<ExprPtr, double>> leaf_distribution(const ReductionTree& tree) {
  std::map<std::string, std::pair<ExprPtr, Kahan>> acc;
  struct Frame {
    const ReductionTree* node;
    double prob;
  };
  std::vector<Frame> work{{&tree, 1.0}};
  while (!work.empty()) {
    Frame f = work.back();
    work.pop_back();
    if (f.node->leaf()) {
      auto key = alpha_key(f.node->expr);
      auto it = acc.find(key);
      if (it == acc.end()) it = acc.emplace(key, std::make_pair(f.node->expr, Kahan{})).first;
      it->second.second.add(f.prob);
      continue;
    }
    for (const auto& [w, child] : f.node->children) work.push_back({child.get(), f.prob * w});
  }
  std::vector<std::pair<ExprPtr, double>> out;
  out.reserve(acc.size());
  for (auto& [key, v] : acc) out.emplace_back(v.first, v.second.sum);
  return out;
}

namespace {

nlohmann::ordered_json tree_json(const ReductionTree& t) {
  nlohmann::ordered_json node;
  node["expr"] = print(t.expr);
  if (!t.leaf()) {
    auto& kids = node["children"] = nlohmann::ordered_json::array();
    for (const auto& [w, child] : t.children) {
      nlohmann::ordered_json edge;
      edge["probability"] = w;
      edge["node"] = tree_json(*child);
      kids.push_back(std::move(edge));
    }
  }
  return node;
}

}  // namespace

std::string tree_to_json(const ReductionTree& tree, int indent) {
  return tree_json(tree).dump(indent);
}

namespace {

// Members of TYPES/REDUCTIONS sets are kept sorted and deduplicated by
// canonical key so set comparisons are plain vector comparisons.
void sorted_insert(std::vector<ExprPtr>& v, const ExprPtr& e) {
  std::string k = alpha_key(e);
  auto it = std::lower_bound(v.begin(), v.end(), e, [&](const ExprPtr& a, const ExprPtr&) {
    return alpha_key(a) < k;
  });
  if (it != v.end() && alpha_eq(*it, e)) return;
  v.insert(it, e);
}

bool stuck_head(const ExprPtr& e);

// Conservative "could this node ever contract within the current scope"
// test used for the T_x side conditions. Dispatch nodes are exempt: their
// resolution only annotates the selected case (no substitution), and a ready
// dispatch argument is typable in the ambient context, hence free of the
// scanned variable, so the step always commutes with outer substitution.
bool redex_form(const ExprPtr& e) {
  return std::visit(overloaded{
                        [&](const Random&) { return true; },
                        [&](const App& a) { return !stuck_head(a.fun); },
                        [&](const Proj& p) { return !stuck_head(p.target); },
                        [&](const If& i) { return !is<Var>(i.cond); },
                        [&](const auto&) { return false; },
                    },
                    e->node);
}

bool stuck_head(const ExprPtr& e) {
  return std::visit(overloaded{
                        [&](const Var&) { return true; },
                        [&](const Const&) { return true; },
                        [&](const Sort&) { return true; },
                        [&](const App& a) { return stuck_head(a.fun); },
                        [&](const Proj& p) {
                          return is<Pair>(p.target) ? false : stuck_head(p.target);
                        },
                        [&](const If& i) { return is<Var>(i.cond); },
                        [&](const auto&) { return false; },
                    },
                    e->node);
}

// T_x: no sub-expression in redex form mentions x. Shadowed occurrences of the
// name refer to a different variable and are skipped.
bool in_T_x(const Context& ctx, const ExprPtr& e, const std::string& x) {
  (void)ctx;
  if (!occurs_free(x, e)) return true;
  if (redex_form(e)) return false;
  return std::visit(
      overloaded{
          [&](const Pair& p) {
            return in_T_x(ctx, p.left, x) && in_T_x(ctx, p.right, x) && in_T_x(ctx, p.tag, x);
          },
          [&](const App& a) { return in_T_x(ctx, a.fun, x) && in_T_x(ctx, a.arg, x); },
          [&](const Lam& l) {
            return in_T_x(ctx, l.domain, x) && (l.var == x || in_T_x(ctx, l.body, x));
          },
          [&](const If& i) {
            return in_T_x(ctx, i.cond, x) && in_T_x(ctx, i.then_branch, x) &&
                   in_T_x(ctx, i.else_branch, x);
          },
          [&](const Proj& p) { return in_T_x(ctx, p.target, x); },
          [&](const Pi& p) {
            return in_T_x(ctx, p.domain, x) && (p.var == x || in_T_x(ctx, p.body, x));
          },
          [&](const Sigma& s) {
            return in_T_x(ctx, s.domain, x) && (s.var == x || in_T_x(ctx, s.body, x));
          },
          [&](const Random& r) { return in_T_x(ctx, r.target, x); },
          [&](const DispatchApp& d) {
            if (!in_T_x(ctx, d.arg, x)) return false;
            if (d.var == x) return true;
            for (const auto& c : d.cases)
              if (!in_T_x(ctx, c.type, x) || !in_T_x(ctx, c.body, x)) return false;
            return true;
          },
          [&](const auto&) { return true; },
      },
      e->node);
}

ExprPtr norm_or_null(const ExprPtr& e) {
  try {
    return normalize(e, default_fuel(e));
  } catch (const Error&) {
    return nullptr;
  }
}

}  // namespace

const Analyzer::Analysis& Analyzer::analyze(const Context& ctx, const ExprPtr& e) {
  std::string key = ctx.alpha_key();
  key += '|';
  key += alpha_key(e);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  Analysis a = compute(ctx, e);
  return memo_.emplace(std::move(key), std::move(a)).first->second;
}

Analyzer::Analysis Analyzer::compute(const Context& ctx, const ExprPtr& e) {
  Analysis bad;
  bad.notype = true;

  // Expressions of the deterministic fragment are typed directly.
  if (is_deterministic(e)) {
    try {
      Analysis a;
      ExprPtr ty = infer_type(ctx, e);
      sorted_insert(a.types, ty);
      sorted_insert(a.reductions, normalize(e, default_fuel(e)));
      return a;
    } catch (const Error&) {
      return bad;
    }
  }

  try {
    return std::visit(
        overloaded{
            [&](const Random& r) -> Analysis {
              const Analysis& af = analyze(ctx, r.target);
              if (af.notype) return bad;
              Analysis out;
              for (const auto& red : af.reductions) {
                if (!is<Lam>(red)) return bad;
                const auto& l = as<Lam>(red);
                if (!alpha_eq(l.domain, e_bool_type())) return bad;
                for (const auto& b : {e_true(), e_false()}) {
                  ExprPtr n = norm_or_null(substitute(l.body, l.var, b));
                  if (!n) return bad;
                  sorted_insert(out.reductions, n);
                }
              }
              for (const auto& ty : af.types) {
                if (!is<Pi>(ty)) return bad;
                const auto& p = as<Pi>(ty);
                if (!alpha_eq(p.domain, e_bool_type())) return bad;
                for (const auto& b : {e_true(), e_false()}) {
                  ExprPtr n = norm_or_null(substitute(p.body, p.var, b));
                  if (!n) return bad;
                  sorted_insert(out.types, n);
                }
              }
              if (out.reductions.empty() || out.types.empty()) return bad;
              return out;
            },
            [&](const If& i) -> Analysis {
              if (!is_deterministic(i.cond) || !check_judgment(ctx, i.cond, e_bool_type()))
                return bad;
              const Analysis& a1 = analyze(ctx, i.then_branch);
              const Analysis& a2 = analyze(ctx, i.else_branch);
              if (a1.notype || a2.notype) return bad;
              Analysis out;
              for (const auto& b1 : a1.reductions)
                for (const auto& b2 : a2.reductions) {
                  ExprPtr n = norm_or_null(mk_if(i.cond, b1, b2));
                  if (!n) return bad;
                  sorted_insert(out.reductions, n);
                }
              for (const auto& t1 : a1.types)
                for (const auto& t2 : a2.types) {
                  // equal branch types take the constant motive, matching the
                  // type assigned to the corresponding normal forms
                  ExprPtr n = alpha_eq(t1, t2) ? t1 : norm_or_null(mk_if(i.cond, t1, t2));
                  if (!n) return bad;
                  sorted_insert(out.types, n);
                }
              return out;
            },
            [&](const Lam& l) -> Analysis {
              if (!is_deterministic(l.domain)) return bad;
              ExprPtr sa;
              try {
                sa = infer_type(ctx, l.domain);
              } catch (const Error&) {
                return bad;
              }
              if (!is_sort(sa)) return bad;
              if (!in_T_x(ctx, l.body, l.var)) return bad;
              std::string var = l.var;
              ExprPtr body = l.body;
              if (ctx.contains(var)) {
                auto avoid = free_vars(body);
                for (const auto& en : ctx.entries()) avoid.insert(en.name);
                std::string fresh = fresh_name(var, avoid);
                body = substitute(body, var, mk_var(fresh));
                var = fresh;
              }
              ExprPtr nd = norm_or_null(l.domain);
              if (!nd) return bad;
              const Analysis& ab = analyze(ctx.extended(var, l.domain), body);
              if (ab.notype) return bad;
              Analysis out;
              for (const auto& bn : ab.reductions)
                sorted_insert(out.reductions, mk_lam(var, nd, bn));
              for (const auto& tn : ab.types) sorted_insert(out.types, mk_pi(var, nd, tn));
              return out;
            },
            [&](const App& app) -> Analysis {
              const Analysis& af = analyze(ctx, app.fun);
              const Analysis& aa = analyze(ctx, app.arg);
              if (af.notype || aa.notype) return bad;
              if (aa.types.size() != 1) return bad;
              const ExprPtr& A = aa.types[0];
              Analysis out;
              for (const auto& red : af.reductions) {
                if (!is<Lam>(red)) return bad;
                const auto& l = as<Lam>(red);
                if (!alpha_eq(l.domain, A)) return bad;
                for (const auto& a1 : aa.reductions) {
                  ExprPtr n = norm_or_null(substitute(l.body, l.var, a1));
                  if (!n) return bad;
                  sorted_insert(out.reductions, n);
                }
              }
              for (const auto& ty : af.types) {
                if (!is<Pi>(ty)) return bad;
                const auto& p = as<Pi>(ty);
                if (!alpha_eq(p.domain, A)) return bad;
                for (const auto& a1 : aa.reductions) {
                  ExprPtr n = norm_or_null(substitute(p.body, p.var, a1));
                  if (!n) return bad;
                  sorted_insert(out.types, n);
                }
              }
              if (out.reductions.empty() || out.types.empty()) return bad;
              return out;
            },
            [&](const DispatchApp& d) -> Analysis {
              const Analysis& aa = analyze(ctx, d.arg);
              if (aa.notype) return bad;
              // Every reachable argument type needs exactly one matching case
              // whose body avoids the bound variable in redex position.
              std::vector<ExprPtr> case_types(d.cases.size());
              for (std::size_t i = 0; i < d.cases.size(); ++i) {
                case_types[i] = norm_or_null(d.cases[i].type);
                if (!case_types[i]) return bad;
              }
              Analysis out;
              for (const auto& A : aa.types) {
                if (!check_judgment(ctx, A, e_star())) return bad;
                int match = -1;
                for (std::size_t i = 0; i < d.cases.size(); ++i) {
                  if (alpha_eq(case_types[i], A)) {
                    if (match >= 0) return bad;
                    match = static_cast<int>(i);
                  }
                }
                if (match < 0) return bad;
                if (!in_T_x(ctx, d.cases[match].body, d.var)) return bad;
              }
              for (const auto& a1 : aa.reductions) {
                ExprPtr ty;
                try {
                  ty = infer_type(ctx, a1);
                } catch (const Error&) {
                  return bad;
                }
                int match = -1;
                for (std::size_t i = 0; i < d.cases.size(); ++i)
                  if (alpha_eq(case_types[i], ty)) match = static_cast<int>(i);
                if (match < 0) return bad;
                ExprPtr inst;
                try {
                  inst = substitute(d.cases[match].body, d.var, a1);
                } catch (const Error&) {
                  return bad;
                }
                const Analysis& ab = analyze(ctx, inst);
                if (ab.notype) return bad;
                for (const auto& B : ab.types) {
                  try {
                    if (!is_sort(infer_type(ctx, B))) return bad;
                  } catch (const Error&) {
                    return bad;
                  }
                  sorted_insert(out.types, B);
                }
                for (const auto& r : ab.reductions) sorted_insert(out.reductions, r);
              }
              if (out.reductions.empty() || out.types.empty()) return bad;
              return out;
            },
            [&](const Pi& p) -> Analysis {
              return formation(ctx, p.var, p.domain, p.body, /*is_pi=*/true);
            },
            [&](const Sigma& s) -> Analysis {
              return formation(ctx, s.var, s.domain, s.body, /*is_pi=*/false);
            },
            [&](const Proj& p) -> Analysis {
              const Analysis& aa = analyze(ctx, p.target);
              if (aa.notype) return bad;
              if (aa.types.size() != 1 || !is<Sigma>(aa.types[0])) return bad;
              const auto& sig = as<Sigma>(aa.types[0]);
              Analysis out;
              for (const auto& a1 : aa.reductions) {
                ExprPtr n = norm_or_null(mk_proj(p.index, a1));
                if (!n) return bad;
                sorted_insert(out.reductions, n);
              }
              if (p.index == 1) {
                sorted_insert(out.types, sig.domain);
              } else {
                for (const auto& a1 : aa.reductions) {
                  ExprPtr n;
                  try {
                    n = norm_or_null(substitute(sig.body, sig.var, mk_proj(1, a1)));
                  } catch (const Error&) {
                    return bad;
                  }
                  if (!n) return bad;
                  sorted_insert(out.types, n);
                }
              }
              return out;
            },
            [&](const auto&) -> Analysis { return bad; },
        },
        e->node);
  } catch (const Error&) {
    return bad;
  }
}

// Shared handling of probabilistic Pi/Sigma bodies.
Analyzer::Analysis Analyzer::formation(const Context& ctx, const std::string& var0,
                                       const ExprPtr& domain, const ExprPtr& body0, bool is_pi) {
  Analysis bad;
  bad.notype = true;
  if (!is_deterministic(domain) || !check_judgment(ctx, domain, e_star())) return bad;
  if (!in_T_x(ctx, body0, var0)) return bad;
  std::string var = var0;
  ExprPtr body = body0;
  if (ctx.contains(var)) {
    auto avoid = free_vars(body);
    for (const auto& en : ctx.entries()) avoid.insert(en.name);
    std::string fresh = fresh_name(var, avoid);
    body = substitute(body, var, mk_var(fresh));
    var = fresh;
  }
  ExprPtr nd = norm_or_null(domain);
  if (!nd) return bad;
  const Analysis& ab = analyze(ctx.extended(var, domain), body);
  if (ab.notype) return bad;
  if (ab.types.size() != 1 || !is_sort(ab.types[0])) return bad;
  Analysis out;
  for (const auto& bn : ab.reductions)
    sorted_insert(out.reductions, is_pi ? mk_pi(var, nd, bn) : mk_sigma(var, nd, bn));
  sorted_insert(out.types, ab.types[0]);
  return out;
}

TypesResult types_of(const Context& ctx, const ExprPtr& e) {
  Analyzer an;
  const auto& a = an.analyze(ctx, e);
  return TypesResult{a.notype, a.types};
}

std::vector<ExprPtr> reductions_of(const Context& ctx, const ExprPtr& e) {
  Analyzer an;
  return an.analyze(ctx, e).reductions;
}

bool is_legal(const Context& ctx, const ExprPtr& e) {
  Analyzer an;
  const auto& a = an.analyze(ctx, e);
  if (a.notype || a.types.empty()) return false;
  for (const auto& s : {e_star(), e_box()}) {
    bool all = true;
    for (const auto& ty : a.types)
      if (!check_judgment(ctx, ty, s)) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

std::vector<std::pair<ExprPtr, double>> type_distribution(const Context& ctx, const ExprPtr& e,
                                                          std::uint64_t fuel,
                                                          std::uint64_t leaf_cap) {
  auto tree = enumerate_tree(ctx, e, fuel, leaf_cap);
  std::map<std::string, std::pair<ExprPtr, Kahan>> acc;
  for (const auto& [leaf, p] : leaf_distribution(tree)) {
    ExprPtr ty = infer_type(ctx, leaf);
    auto key = alpha_key(ty);
    auto it = acc.find(key);
    if (it == acc.end()) it = acc.emplace(key, std::make_pair(ty, Kahan{})).first;
    it->second.second.add(p);
  }
  std::vector<std::pair<ExprPtr, double>> out;
  out.reserve(acc.size());
  for (auto& [key, v] : acc) out.emplace_back(v.first, v.second.sum);
  return out;
}

double judge_prob(const Context& ctx, const ExprPtr& e, const ExprPtr& ty,
                  const JudgeOptions& opts) {
  ExprPtr target = normalize(ty, default_fuel(ty));
  if (opts.mode == JudgeMode::Exact) {
    auto tree = enumerate_tree(ctx, e, opts.fuel, opts.leaf_cap);
    Kahan mass;
    for (const auto& [leaf, p] : leaf_distribution(tree))
      if (check_judgment(ctx, leaf, target)) mass.add(p);
    return mass.sum;
  }
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < opts.n_samples; ++i) {
    auto res = sample_reduce(ctx, e, opts.seed + i, opts.fuel);
    if (check_judgment(ctx, res.normal_form, target)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(opts.n_samples);
}

}  // namespace pdts
