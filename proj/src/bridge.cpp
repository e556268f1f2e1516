#include "pdts/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

namespace pdts::bridge {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

mln::Term rename_term(const mln::Term& t, const std::map<std::string, std::string>& renames) {
  mln::Term out = t;
  if (t.kind != mln::Term::Kind::Function) {
    auto it = renames.find(t.name);
    if (it != renames.end()) out.name = it->second;
    return out;
  }
  for (auto& a : out.args) a = rename_term(a, renames);
  return out;
}

mln::FormulaPtr rename_constants(const mln::FormulaPtr& f,
                                 const std::map<std::string, std::string>& renames) {
  return std::visit(
      overloaded{
          [&](const mln::Atom& a) {
            std::vector<mln::Term> args;
            for (const auto& t : a.args) args.push_back(rename_term(t, renames));
            return mln::f_atom(a.pred, std::move(args));
          },
          [&](const mln::Not& n) { return mln::f_not(rename_constants(n.sub, renames)); },
          [&](const mln::And& n) {
            return mln::f_and(rename_constants(n.lhs, renames),
                              rename_constants(n.rhs, renames));
          },
          [&](const mln::Or& n) {
            return mln::f_or(rename_constants(n.lhs, renames),
                             rename_constants(n.rhs, renames));
          },
          [&](const mln::Implies& n) {
            return mln::f_implies(rename_constants(n.lhs, renames),
                                  rename_constants(n.rhs, renames));
          },
          [&](const mln::Quant& q) {
            return mln::f_quant(q.kind, q.var, rename_constants(q.body, renames));
          },
      },
      f->node);
}

}  // namespace

MlnToDtnResult mln_to_dtn(const mln::Mln& m, bool simplify_negation) {
  MlnToDtnResult out;
  out.spec.n_constants = m.sig.constants.size();
  std::map<std::string, std::string> renames;
  for (std::size_t i = 0; i < m.sig.constants.size(); ++i)
    renames[m.sig.constants[i]] = out.spec.constant_name(i);
  for (const auto& p : m.sig.predicates) {
    if (p.arity == 1)
      out.spec.unary_preds.push_back(p.name);
    else if (p.arity == 2)
      out.spec.binary_preds.push_back(p.name);
    else
      throw UnknownSymbol("translation requires unary or binary predicates, '" + p.name +
                          "' has arity " + std::to_string(p.arity));
  }
  for (const auto& f : m.sig.functions) {
    mln::FuncDecl decl{f.name, f.arity, {}};
    for (const auto& [args, res] : f.table) {
      std::vector<std::string> nargs;
      for (const auto& a : args) {
        auto it = renames.find(a);
        nargs.push_back(it == renames.end() ? a : it->second);
      }
      auto it = renames.find(res);
      decl.table[nargs] = it == renames.end() ? res : it->second;
    }
    if (f.arity == 1)
      out.spec.unary_funcs.push_back(std::move(decl));
    else if (f.arity == 2)
      out.spec.binary_funcs.push_back(std::move(decl));
    else
      throw UnknownSymbol("translation requires unary or binary functions");
  }

  mln::Mln expanded = mln::expand_free_variables(m);
  std::size_t index = 0;
  for (const auto& wf : expanded.formulas) {
    if (wf.weight == 0.0) {
      out.warnings.push_back("dropped zero-weight formula '" +
                             mln::print_formula(wf.formula) + "'");
      continue;
    }
    mln::FormulaPtr f = rename_constants(wf.formula, renames);
    // Sign normalization keeps the refutation weight non-positive.
    mln::FormulaPtr f_prime = wf.weight > 0.0 ? mln::f_not(f) : f;
    double w_prime = wf.weight > 0.0 ? -wf.weight : wf.weight;
    mln::FormulaPtr refutation = mln::f_not(f_prime);
    if (simplify_negation && std::holds_alternative<mln::Not>(f_prime->node))
      refutation = std::get<mln::Not>(f_prime->node).sub;
    double p = 1.0 - std::exp(w_prime);
    out.spec.formulas.push_back(
        dtn::DtnFormula{"f" + std::to_string(++index), refutation, p});
  }
  return out;
}

mln::Mln dtn_to_mln(const dtn::DtnSpec& spec) {
  mln::Mln out = dtn::signature_as_mln(spec);
  for (const auto& f : spec.formulas)
    out.formulas.push_back(mln::WeightedFormula{mln::f_not(f.formula), std::log(1.0 - f.p)});
  return out;
}

TranslationReport verify_translation(const std::vector<double>& src,
                                     const std::vector<double>& dst) {
  if (src.size() != dst.size())
    throw DimensionMismatch("world tables have different sizes: " + std::to_string(src.size()) +
                            " vs " + std::to_string(dst.size()));
  TranslationReport rep;
  rep.n_worlds = src.size();
  rep.src = src;
  rep.dst = dst;
  for (std::size_t i = 0; i < src.size(); ++i)
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(src[i] - dst[i]));
  return rep;
}

std::vector<double> mln_world_table(const mln::Mln& m, int world_cap) {
  return mln::world_table(mln::ground(m), world_cap);
}

std::vector<double> dtn_world_table_in_mln_order(const dtn::DtnSpec& spec,
                                                 const mln::Mln& reference, int atom_cap) {
  std::vector<double> table = dtn::world_table(spec, dtn::WorldOptions{atom_cap});
  mln::GroundNetwork ref = mln::ground(reference);

  std::map<std::string, std::size_t> ref_const, dtn_const;
  for (std::size_t i = 0; i < reference.sig.constants.size(); ++i)
    ref_const[reference.sig.constants[i]] = i;
  for (std::size_t i = 0; i < spec.n_constants; ++i) dtn_const[spec.constant_name(i)] = i;

  auto dtn_atoms = dtn::ground_atoms(spec);
  std::map<std::pair<std::string, std::vector<std::size_t>>, std::size_t> dtn_index;
  for (std::size_t j = 0; j < dtn_atoms.size(); ++j) {
    std::vector<std::size_t> arg_ids;
    for (const auto& a : dtn_atoms[j].args) arg_ids.push_back(dtn_const.at(a));
    dtn_index[{dtn_atoms[j].pred, arg_ids}] = j;
  }
  if (ref.n_atoms() != dtn_atoms.size())
    throw DimensionMismatch("atom sets differ: " + std::to_string(ref.n_atoms()) + " vs " +
                            std::to_string(dtn_atoms.size()));

  std::vector<std::size_t> perm(ref.n_atoms());
  for (std::size_t i = 0; i < ref.n_atoms(); ++i) {
    std::vector<std::size_t> arg_ids;
    for (const auto& a : ref.atoms[i].args) arg_ids.push_back(ref_const.at(a));
    auto it = dtn_index.find({ref.atoms[i].pred, arg_ids});
    if (it == dtn_index.end())
      throw DimensionMismatch("atom " + ref.atoms[i].pred + " missing from the translation");
    perm[i] = it->second;
  }

  std::vector<double> out(table.size());
  for (std::uint64_t bits = 0; bits < out.size(); ++bits) {
    std::uint64_t mapped = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      if ((bits >> i) & 1u) mapped |= 1ull << perm[i];
    out[bits] = table[mapped];
  }
  return out;
}

}  // namespace pdts::bridge
