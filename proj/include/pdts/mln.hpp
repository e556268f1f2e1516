#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdts/errors.hpp"

namespace pdts::mln {

// First-order terms over constants, variables and tabulated functions.
// Bare identifiers parse as Variable; names declared as constants are
// recognized during grounding/evaluation.
struct Term {
  enum class Kind { Constant, Variable, Function };
  Kind kind;
  std::string name;          // constant or variable name, or function symbol
  std::vector<Term> args;    // function arguments
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Atom {
  std::string pred;
  std::vector<Term> args;
};
struct Not {
  FormulaPtr sub;
};
struct And {
  FormulaPtr lhs, rhs;
};
struct Or {
  FormulaPtr lhs, rhs;
};
struct Implies {
  FormulaPtr lhs, rhs;
};
enum class QuantKind { Forall, Exists };
struct Quant {
  QuantKind kind;
  std::string var;
  FormulaPtr body;
};

struct Formula {
  std::variant<Atom, Not, And, Or, Implies, Quant> node;
};

FormulaPtr f_atom(std::string pred, std::vector<Term> args);
FormulaPtr f_not(FormulaPtr sub);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_quant(QuantKind k, std::string var, FormulaPtr body);

std::string print_formula(const FormulaPtr& f);
// Parses the formula operators ~ & | -> forall exists over identifiers.
FormulaPtr parse_formula(const std::string& text);

std::vector<std::string> formula_free_vars(const FormulaPtr& f);

struct PredDecl {
  std::string name;
  int arity;
};
struct FuncDecl {
  std::string name;
  int arity;
  // Explicit finite graph: argument tuple -> constant.
  std::map<std::vector<std::string>, std::string> table;
};

struct Signature {
  std::vector<PredDecl> predicates;
  std::vector<FuncDecl> functions;
  std::vector<std::string> constants;

  const PredDecl* find_pred(const std::string& name) const;
  const FuncDecl* find_func(const std::string& name) const;
  bool has_constant(const std::string& name) const;
};

struct WeightedFormula {
  FormulaPtr formula;
  double weight;
};

struct Mln {
  Signature sig;
  std::vector<WeightedFormula> formulas;
};

// Text format: "predicate A/1", "constant c1", "function g/1 { c1 -> c2; }",
// weighted lines "1.5 :: A(x) -> B(x)". '#' starts a comment.
Mln parse_mln(const std::string& text);
std::string print_mln(const Mln& m);

// Joint assignment to all ground atoms, atom i at bit i.
struct World {
  std::uint64_t bits = 0;
  std::size_t n_atoms = 0;
  bool get(std::size_t i) const { return (bits >> i) & 1u; }
};

struct GroundAtom {
  std::string pred;
  std::vector<std::string> args;
  bool operator<(const GroundAtom& o) const {
    return pred != o.pred ? pred < o.pred : args < o.args;
  }
};

// Ground network: atoms indexed in declaration order (arguments row-major),
// plus fully ground weighted formulas.
struct GroundNetwork {
  Signature sig;
  std::vector<GroundAtom> atoms;
  std::map<GroundAtom, std::size_t> atom_index;
  std::vector<WeightedFormula> ground_formulas;

  std::size_t n_atoms() const { return atoms.size(); }
};

GroundNetwork ground(const Mln& m);

// Instantiates every free variable over the constant set, one weighted
// formula per grounding. Quantifiers are left in place.
Mln expand_free_variables(const Mln& m);

// Replaces quantifiers by finite conjunctions/disjunctions over the constants
// and resolves function applications through their tables.
FormulaPtr expand_quantifiers(const FormulaPtr& f, const Signature& sig);

// Classical evaluation of a fully ground, quantifier-free formula.
bool eval_formula(const FormulaPtr& f, const GroundNetwork& net, const World& w);

// Unnormalized product of clique potentials.
double world_weight(const GroundNetwork& net, const World& w);
double log_world_weight(const GroundNetwork& net, const World& w);

struct QueryOptions {
  FormulaPtr evidence;        // hard constraint: restrict the world sum
  int world_cap = 24;         // maximum atom count for exact enumeration
};

// Exact query probability by full world enumeration.
double query_prob(const GroundNetwork& net, const FormulaPtr& query,
                  const QueryOptions& opts = {});

// Normalized world distribution indexed by World::bits.
std::vector<double> world_table(const GroundNetwork& net, int world_cap = 24);

}  // namespace pdts::mln
