#include <cmath>
#include <random>

#include "doctest.h"
#include "pdts/pdts.hpp"

using namespace pdts;
using pdts::bridge::mln_to_dtn;
using pdts::bridge::dtn_to_mln;
using pdts::bridge::verify_translation;

namespace {

mln::Mln single_formula_mln(const char* formula, double w) {
  mln::Mln m;
  m.sig.predicates = {{"A", 1}};
  m.sig.constants = {"c1"};
  m.formulas.push_back({mln::parse_formula(formula), w});
  return m;
}

// Random ground network over at most three atoms and four formulas.
mln::Mln random_small_mln(std::mt19937_64& rng) {
  mln::Mln m;
  int n_atoms = 1 + rng() % 3;
  if (n_atoms <= 2) {
    m.sig.constants = {"u"};
    for (int i = 0; i < n_atoms; ++i)
      m.sig.predicates.push_back({"P" + std::to_string(i + 1), 1});
  } else {
    // mix in a binary predicate: P1(u), P2(u), R(u,u)
    m.sig.constants = {"u"};
    m.sig.predicates = {{"P1", 1}, {"P2", 1}, {"R", 2}};
  }
  std::vector<std::string> atoms;
  for (const auto& p : m.sig.predicates)
    atoms.push_back(p.arity == 1 ? p.name + "(u)" : p.name + "(u, u)");
  auto atom = [&] { return atoms[rng() % atoms.size()]; };
  auto formula = [&]() -> std::string {
    switch (rng() % 5) {
      case 0: return atom();
      case 1: return "~" + atom();
      case 2: return atom() + " & " + atom();
      case 3: return atom() + " | " + atom();
      default: return atom() + " -> " + atom();
    }
  };
  int nf = 1 + rng() % 4;
  for (int i = 0; i < nf; ++i) {
    double w = -2.0 + 4.0 * (double(rng() % 1000) / 999.0);
    if (std::abs(w) < 0.05) w = 0.5;  // keep away from the dropped-zero case
    m.formulas.push_back({mln::parse_formula(formula()), w});
  }
  return m;
}

}  // namespace

TEST_CASE("mln_to_dtn: sign normalization and weights") {
  // positive weight: asserted as the refutation of the negation
  auto pos = mln_to_dtn(single_formula_mln("A(c1)", 1.5));
  REQUIRE(pos.spec.formulas.size() == 1);
  CHECK(mln::print_formula(pos.spec.formulas[0].formula) == "~~A(c1)");
  CHECK(pos.spec.formulas[0].p == doctest::Approx(1 - std::exp(-1.5)).epsilon(1e-12));
  CHECK(pos.warnings.empty());

  // the double negation can be collapsed classically behind the flag
  auto simp = mln_to_dtn(single_formula_mln("A(c1)", 1.5), /*simplify_negation=*/true);
  CHECK(mln::print_formula(simp.spec.formulas[0].formula) == "A(c1)");

  // negative weight: the formula itself is refuted
  auto neg = mln_to_dtn(single_formula_mln("A(c1)", -1.5));
  CHECK(mln::print_formula(neg.spec.formulas[0].formula) == "~A(c1)");
  CHECK(neg.spec.formulas[0].p == doctest::Approx(1 - std::exp(-1.5)).epsilon(1e-12));

  // zero weights are dropped with a warning
  auto zero = mln_to_dtn(single_formula_mln("A(c1)", 0.0));
  CHECK(zero.spec.formulas.empty());
  REQUIRE(zero.warnings.size() == 1);

  // free variables are expanded before translation; constants are renamed
  mln::Mln t;
  t.sig.predicates = {{"A", 1}};
  t.sig.constants = {"first", "second"};
  t.formulas.push_back({mln::parse_formula("A(x)"), 1.0});
  auto r = mln_to_dtn(t);
  REQUIRE(r.spec.formulas.size() == 2);
  CHECK(mln::print_formula(r.spec.formulas[0].formula) == "~~A(c1)");
  CHECK(mln::print_formula(r.spec.formulas[1].formula) == "~~A(c2)");

  // arities beyond two have no dependent-type signature
  mln::Mln bad;
  bad.sig.predicates = {{"T", 3}};
  bad.sig.constants = {"c1"};
  CHECK_THROWS_AS(mln_to_dtn(bad), UnknownSymbol);
}

TEST_CASE("mln_to_dtn preserves the world distribution") {
  for (double w : {0.5, 1.0, 2.0, -1.0}) {
    mln::Mln m;
    m.sig.predicates = {{"A", 1}, {"B", 1}};
    m.sig.constants = {"c1"};
    m.formulas.push_back({mln::parse_formula("A(x) -> B(x)"), w});
    m.formulas.push_back({mln::parse_formula("A(c1)"), std::abs(w)});
    auto res = mln_to_dtn(m);
    auto rep = verify_translation(bridge::mln_world_table(m),
                                  bridge::dtn_world_table_in_mln_order(res.spec, m));
    CHECK(rep.max_abs_deviation < 1e-12);
    // the simplified translation preserves it too
    auto simp = mln_to_dtn(m, true);
    auto rep2 = verify_translation(bridge::mln_world_table(m),
                                   bridge::dtn_world_table_in_mln_order(simp.spec, m));
    CHECK(rep2.max_abs_deviation < 1e-12);
  }
}

TEST_CASE("dtn_to_mln: refutations with log-complement weights") {
  dtn::DtnSpec s;
  s.n_constants = 1;
  s.unary_preds = {"B"};
  s.formulas.push_back({"f1", mln::parse_formula("B(c1)"), 0.5});
  mln::Mln m = dtn_to_mln(s);
  REQUIRE(m.formulas.size() == 1);
  CHECK(mln::print_formula(m.formulas[0].formula) == "~B(c1)");
  CHECK(m.formulas[0].weight == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  auto table = bridge::mln_world_table(m);
  // unnormalized weights: B=1 -> 1, B=0 -> 0.5
  CHECK(table[1] == doctest::Approx(1.0 / 1.5).epsilon(1e-12));
  CHECK(table[0] == doctest::Approx(0.5 / 1.5).epsilon(1e-12));
  // and the DTN agrees with its own translation
  auto rep = verify_translation(bridge::dtn_world_table_in_mln_order(s, m),
                                bridge::mln_world_table(m));
  CHECK(rep.max_abs_deviation < 1e-12);

  // a DTN with no formulas translates to the empty, uniform network
  dtn::DtnSpec flat;
  flat.n_constants = 1;
  flat.unary_preds = {"B"};
  mln::Mln fm = dtn_to_mln(flat);
  CHECK(fm.formulas.empty());
  for (double p : bridge::mln_world_table(fm)) CHECK(p == doctest::Approx(0.5));
}

TEST_CASE("the worked spec round-trips onto the log-linear example") {
  double w1 = std::log(2.0), w2 = std::log(2.0);
  dtn::DtnSpec s;
  s.n_constants = 1;
  s.unary_preds = {"B1", "B2"};
  s.formulas.push_back({"f1", mln::parse_formula("B1(c1) -> B2(c1)"), 1 - std::exp(-w1)});
  s.formulas.push_back({"f2", mln::parse_formula("B1(c1)"), 1 - std::exp(-w2)});
  mln::Mln back = dtn_to_mln(s);
  auto rep = verify_translation(bridge::dtn_world_table_in_mln_order(s, back),
                                bridge::mln_world_table(back));
  CHECK(rep.max_abs_deviation < 1e-12);
  // query probability carried across the translation
  CHECK(mln::query_prob(mln::ground(back), mln::parse_formula("B2(c1)")) ==
        doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("verify_translation report") {
  std::vector<double> a{0.25, 0.25, 0.25, 0.25};
  auto same = verify_translation(a, a);
  CHECK(same.max_abs_deviation == 0.0);
  CHECK(same.n_worlds == 4);
  std::vector<double> b{0.3, 0.2, 0.25, 0.25};
  CHECK(verify_translation(a, b).max_abs_deviation == doctest::Approx(0.05));
  CHECK_THROWS_AS(verify_translation(a, std::vector<double>{0.5, 0.5}), DimensionMismatch);
}

TEST_CASE("property: translations preserve world tables on random networks") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 60; ++trial) {
    mln::Mln m = random_small_mln(rng);
    auto src = bridge::mln_world_table(m);
    auto res = mln_to_dtn(m);
    auto via_dtn = bridge::dtn_world_table_in_mln_order(res.spec, m);
    for (std::size_t i = 0; i < src.size(); ++i)
      CHECK(std::abs(src[i] - via_dtn[i]) < 1e-9);
    // and back again
    mln::Mln back = dtn_to_mln(res.spec);
    auto again = bridge::dtn_world_table_in_mln_order(res.spec, back);
    auto round = bridge::mln_world_table(back);
    for (std::size_t i = 0; i < round.size(); ++i)
      CHECK(std::abs(round[i] - again[i]) < 1e-9);
  }
}

TEST_CASE("property: canonical networks represent arbitrary positive distributions") {
  // one formula per world, weighted by the log of its target probability
  std::mt19937_64 rng(31415);
  for (int n_atoms : {2, 3}) {
    for (int trial = 0; trial < 15; ++trial) {
      std::size_t n_worlds = 1u << n_atoms;
      std::vector<double> target(n_worlds);
      double z = 0;
      for (auto& p : target) {
        p = 0.05 + double(rng() % 1000) / 1000.0;
        z += p;
      }
      for (auto& p : target) p /= z;

      mln::Mln m;
      m.sig.constants = {"u"};
      for (int i = 0; i < n_atoms; ++i)
        m.sig.predicates.push_back({"P" + std::to_string(i + 1), 1});
      for (std::size_t w = 0; w < n_worlds; ++w) {
        std::string conj;
        for (int i = 0; i < n_atoms; ++i) {
          if (i) conj += " & ";
          if (!((w >> i) & 1u)) conj += "~";
          conj += "P" + std::to_string(i + 1) + "(u)";
        }
        m.formulas.push_back({mln::parse_formula(conj), std::log(target[w])});
      }
      auto direct = bridge::mln_world_table(m);
      auto res = mln_to_dtn(m);
      auto via_dtn = bridge::dtn_world_table_in_mln_order(res.spec, m);
      for (std::size_t w = 0; w < n_worlds; ++w) {
        CHECK(std::abs(direct[w] - target[w]) < 1e-9);
        CHECK(std::abs(via_dtn[w] - target[w]) < 1e-6);
      }
    }
  }
}
