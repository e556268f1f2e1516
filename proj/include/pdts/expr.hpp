#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pdts/errors.hpp"

namespace pdts {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Base constants: 1, TRUE, FALSE, UNIT, BOOL.
enum class ConstKind { One, True, False, UnitType, BoolType };
enum class SortKind { Star, Box };

struct Const {
  ConstKind k;
};
struct Sort {
  SortKind s;
};
struct Var {
  std::string name;
};
// (left, right) tagged with its intended pair type. Components must be values.
struct Pair {
  ExprPtr left, right, tag;
};
struct App {
  ExprPtr fun, arg;
};
struct Lam {
  std::string var;
  ExprPtr domain, body;
};
struct If {
  ExprPtr cond, then_branch, else_branch;
};
struct Proj {
  int index;  // 1 or 2
  ExprPtr target;
};
struct Pi {
  std::string var;
  ExprPtr domain, body;
};
struct Sigma {
  std::string var;
  ExprPtr domain, body;
};
// Weighted coin: reduces to (target TRUE) with probability rho, else (target FALSE).
struct Random {
  double rho;
  ExprPtr target;
};
struct DispatchCase {
  ExprPtr type;
  ExprPtr body;
};
// Type-directed application (\x.{(T1,b1);...}) arg: the case whose type matches
// the argument's type is selected at reduction time.
struct DispatchApp {
  std::string var;
  std::vector<DispatchCase> cases;
  ExprPtr arg;
};

struct Expr {
  using Node =
      std::variant<Const, Sort, Var, Pair, App, Lam, If, Proj, Pi, Sigma, Random, DispatchApp>;
  Node node;
  // Cached structural facts, filled in by the factories below.
  bool deterministic = true;    // no Random/DispatchApp anywhere inside
  bool has_redex_form = false;  // some subterm matches a beta contraction shape
  std::uint32_t size = 1;       // node count
  std::uint64_t name_bloom = 0; // filter over variable names occurring inside

  explicit Expr(Node n) : node(std::move(n)) {}
};

std::uint64_t name_bloom_bit(const std::string& name);

template <typename T>
bool is(const ExprPtr& e) {
  return std::holds_alternative<T>(e->node);
}
template <typename T>
const T& as(const ExprPtr& e) {
  return std::get<T>(e->node);
}

// Factories. These enforce the construction invariants: pair components are
// values and random weights lie strictly inside (0,1).
ExprPtr mk_const(ConstKind k);
ExprPtr mk_sort(SortKind s);
ExprPtr mk_var(std::string name);
ExprPtr mk_pair(ExprPtr left, ExprPtr right, ExprPtr tag);
ExprPtr mk_app(ExprPtr fun, ExprPtr arg);
ExprPtr mk_lam(std::string var, ExprPtr domain, ExprPtr body);
ExprPtr mk_if(ExprPtr cond, ExprPtr then_branch, ExprPtr else_branch);
ExprPtr mk_proj(int index, ExprPtr target);
ExprPtr mk_pi(std::string var, ExprPtr domain, ExprPtr body);
ExprPtr mk_sigma(std::string var, ExprPtr domain, ExprPtr body);
ExprPtr mk_random(double rho, ExprPtr target);
ExprPtr mk_dispatch(std::string var, std::vector<DispatchCase> cases, ExprPtr arg);

// Shared constants.
const ExprPtr& e_one();
const ExprPtr& e_true();
const ExprPtr& e_false();
const ExprPtr& e_unit_type();
const ExprPtr& e_bool_type();
const ExprPtr& e_star();
const ExprPtr& e_box();

// Values: constants, sorts, variables and pairs of values.
bool is_value(const ExprPtr& e);
// Deterministic fragment: no Random or dispatch nodes (cached flag).
inline bool is_deterministic(const ExprPtr& e) { return e->deterministic; }

bool occurs_free(const std::string& name, const ExprPtr& e);
std::set<std::string> free_vars(const ExprPtr& e);

// Capture-avoiding substitution e[x := v]. Renames binders when needed; throws
// PairSubstitutionViolation if a non-value would land in a pair component.
ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& v);

bool alpha_eq(const ExprPtr& a, const ExprPtr& b);
// Total order compatible with alpha-equivalence (canonical renaming of binders).
std::string alpha_key(const ExprPtr& e);

// Fresh name based on `base` avoiding every name in `avoid`.
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

// Ordered list of variable:type statements with pairwise distinct names.
class Context {
 public:
  struct Entry {
    std::string name;
    ExprPtr type;
  };

  Context() = default;

  void push(std::string name, ExprPtr type);  // throws DuplicateName
  Context extended(std::string name, ExprPtr type) const;

  const ExprPtr* lookup(const std::string& name) const;
  bool contains(const std::string& name) const { return lookup(name) != nullptr; }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::string alpha_key() const;

 private:
  std::vector<Entry> entries_;
};

// Comparator for alpha-keyed containers of expressions.
struct AlphaLess {
  bool operator()(const ExprPtr& a, const ExprPtr& b) const { return alpha_key(a) < alpha_key(b); }
};
using ExprSet = std::set<ExprPtr, AlphaLess>;

}  // namespace pdts
