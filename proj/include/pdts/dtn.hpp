#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdts/expr.hpp"
#include "pdts/mln.hpp"

namespace pdts::dtn {

struct DtnFormula {
  std::string name;          // proof constant, e.g. f1
  mln::FormulaPtr formula;   // first-order statement over the declared language
  double p;                  // probabilistic weight, strictly inside (0,1)
};

// A language (domain size, unary/binary predicates and functions) plus a
// weighted formula list. Constants are canonically named c1..cN.
struct DtnSpec {
  std::size_t n_constants = 0;
  std::vector<std::string> unary_preds, binary_preds;
  std::vector<mln::FuncDecl> unary_funcs, binary_funcs;
  std::vector<DtnFormula> formulas;

  std::string constant_name(std::size_t i) const { return "c" + std::to_string(i + 1); }
};

// Text format:
//   domain 2
//   unary B1 B2
//   binary R
//   function g/1 { c1 -> c2; c2 -> c1; }
//   formula f1 : B1(c1) -> B2(c1) @ 0.5      # direct probability
//   formula f2 : B1(c1) @w 1.2               # p = 1 - e^{-1.2}
DtnSpec parse_dtn(const std::string& text);
std::string print_dtn(const DtnSpec& spec);

// Ground atoms in world order: unary predicates (declaration-major, constant
// minor), then binary predicates (first argument major). Bit i set means atom
// i holds.
struct DtnWorld {
  std::uint64_t bits = 0;
  std::size_t n_atoms = 0;
  bool get(std::size_t i) const { return (bits >> i) & 1u; }
};

std::size_t atom_count(const DtnSpec& spec);
std::vector<mln::GroundAtom> ground_atoms(const DtnSpec& spec);

// The DTN's language viewed as an MLN signature; atom order matches DtnWorld.
mln::Mln signature_as_mln(const DtnSpec& spec);

// The language context: domain, contradiction, constants, predicates,
// functions, then proof constants for both polarities of every ground atom.
Context build_language_context(const DtnSpec& spec);

// Formulae-as-types: /\ -> product, \/ -> disjoint product over Bool,
// -> -> function space, ~X -> X -> bot, forall/exists -> Pi/Sigma over A.
ExprPtr formula_to_type(const DtnSpec& spec, const mln::FormulaPtr& f);
// Partial inverse of formula_to_type; rejects types outside its image.
mln::FormulaPtr type_to_formula(const DtnSpec& spec, const ExprPtr& ty);

// Classical truth of formula f_index under the world's atom assignment,
// quantifiers ranging over the declared constants.
bool consistent(const DtnSpec& spec, const DtnWorld& world, std::size_t f_index);

struct WorldOptions {
  int atom_cap = 20;
};

// Normalized world distribution indexed by DtnWorld::bits. The per-world
// weight sums formula-subset masses over consistent subsets (enumerated
// explicitly up to 20 formulas, factorized per formula beyond that).
std::vector<double> world_table(const DtnSpec& spec, const WorldOptions& opts = {});
double world_prob(const DtnSpec& spec, const DtnWorld& world, const WorldOptions& opts = {});

double query_exact(const DtnSpec& spec, const mln::FormulaPtr& query,
                   const WorldOptions& opts = {});

// The canonical query program: formula coins, a world sampler, and a final
// type-directed dispatch returning a proof of Q, of ~Q, or of bot.
struct QueryProgram {
  Context ctx;         // language + formula proofs + proof witnesses
  ExprPtr program;     // reduces to one of the three witnesses below
  ExprPtr q_type;      // normalized query type
  ExprPtr q_neg_type;  // q_type -> bot
  ExprPtr bot_type;
};

QueryProgram build_query_program(const DtnSpec& spec, const ExprPtr& q_type);

struct SampleStats {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
  std::uint64_t n_rejected = 0;
};

// Monte-Carlo estimate of the query by repeated reduction of the query
// program, rejecting contradiction proofs. Per-sample seeds derive from
// (seed, index), so any partition of the index range gives identical results.
SampleStats query_sampled(const DtnSpec& spec, const mln::FormulaPtr& query, std::uint64_t n,
                          std::uint64_t seed, std::uint64_t fuel = 1u << 16);

}  // namespace pdts::dtn
