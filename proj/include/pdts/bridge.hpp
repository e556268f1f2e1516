#pragma once

#include <string>
#include <vector>

#include "pdts/dtn.hpp"
#include "pdts/mln.hpp"

namespace pdts::bridge {

struct MlnToDtnResult {
  dtn::DtnSpec spec;
  std::vector<std::string> warnings;  // e.g. dropped zero-weight formulas
};

// Canonical translation of a ground MLN into a DTN: formulas are expanded
// over their free-variable groundings, sign-normalized (positive weights
// negate the formula), then asserted as refutations F' -> bot with
// p = 1 - exp(w'). Constants are renamed positionally to c1..cN.
// With simplify_negation, the double negation produced for positive weights
// is collapsed classically.
MlnToDtnResult mln_to_dtn(const mln::Mln& m, bool simplify_negation = false);

// Canonical translation of a DTN into an MLN: one pair (~F_i, log(1-p_i))
// per formula over the matching signature.
mln::Mln dtn_to_mln(const dtn::DtnSpec& spec);

struct TranslationReport {
  std::size_t n_worlds = 0;
  double max_abs_deviation = 0.0;
  std::vector<double> src, dst;
};

// Compares two world tables over the same enumeration order.
TranslationReport verify_translation(const std::vector<double>& src,
                                     const std::vector<double>& dst);

// World tables over a shared atom order for cross-checking translations: the
// DTN table is permuted into the atom order of the given MLN ground network.
std::vector<double> mln_world_table(const mln::Mln& m, int world_cap = 24);
std::vector<double> dtn_world_table_in_mln_order(const dtn::DtnSpec& spec,
                                                 const mln::Mln& reference, int atom_cap = 20);

}  // namespace pdts::bridge
