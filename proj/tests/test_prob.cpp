#include <cmath>
#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "pdts/pdts.hpp"

using namespace pdts;
using oracles::Corpus;

namespace {

ExprPtr P(const std::string& s) { return parse_term(s); }

const Context& empty_ctx() {
  static Context ctx;
  return ctx;
}

std::map<std::string, double> leaf_map(const ReductionTree& t) {
  std::map<std::string, double> out;
  for (const auto& [leaf, p] : leaf_distribution(t)) out[print(leaf)] = p;
  return out;
}

// Collected per-node path mass, grouped by expression.
void node_mass(const ReductionTree& t, double prob, std::map<std::string, double>& acc) {
  acc[alpha_key(t.expr)] += prob;
  for (const auto& [w, child] : t.children) node_mass(*child, prob * w, acc);
}

}  // namespace

TEST_CASE("select_redex: priority and normal forms") {
  auto r = select_redex(P("random[0.5](\\x:Bool. x)"));
  REQUIRE(r.has_value());
  CHECK(r->kind == detail::RedexKind::Random);
  CHECK(r->path.empty());  // the node itself

  // with no probabilistic redexes the deterministic one is picked
  auto b = select_redex(P("(\\x:Bool. x) true"));
  REQUIRE(b.has_value());
  CHECK(b->kind == detail::RedexKind::Beta);

  CHECK(!select_redex(P("true")).has_value());
  CHECK(!select_redex(P("\\x:Bool. x")).has_value());

  // a random buried under a redex still wins
  auto n = select_redex(P("(\\x:Bool. x) (random[0.25](\\y:Bool. y))"));
  REQUIRE(n.has_value());
  CHECK(n->kind == detail::RedexKind::Random);
}

TEST_CASE("step_rho: weighted alternatives") {
  auto steps = step_rho(P("random[0.3](\\x:Bool. if x then true else 1)"));
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].probability == doctest::Approx(0.3));
  CHECK(steps[1].probability == doctest::Approx(0.7));
  CHECK(alpha_eq(steps[0].result, P("(\\x:Bool. if x then true else 1) true")));
  CHECK(alpha_eq(steps[1].result, P("(\\x:Bool. if x then true else 1) false")));

  auto det = step_rho(P("if true then a else b"));
  REQUIRE(det.size() == 1);
  CHECK(det[0].probability == doctest::Approx(1.0));
  CHECK(alpha_eq(det[0].result, P("a")));

  CHECK(step_rho(P("true")).empty());
}

TEST_CASE("step_rho: dispatch resolves through the unique matching case") {
  auto steps = step_rho(P("case x {Bool => true; Unit => false;}(1)"));
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].probability == doctest::Approx(1.0));
  // one step: annotate with the selected case, do not substitute yet
  CHECK(alpha_eq(steps[0].result, P("(\\x:Unit. false) 1")));

  CHECK_THROWS_AS(step_rho(P("case x {Unit => false;}(true)")), DispatchNoMatch);
  CHECK_THROWS_AS(step_rho(P("case x {Bool => false; Bool => true;}(true)")),
                  DispatchAmbiguous);
  // a dispatch whose argument is still probabilistic waits for the argument
  auto inner = step_rho(P("case x {Bool => x;}(random[0.5](\\b:Bool. b))"));
  REQUIRE(inner.size() == 2);
}

TEST_CASE("sample_reduce: determinism and log probabilities") {
  ExprPtr e = P("random[0.5](\\x:Bool. x)");
  auto r1 = sample_reduce(empty_ctx(), e, 11, 1000);
  auto r2 = sample_reduce(empty_ctx(), e, 11, 1000);
  CHECK(alpha_eq(r1.normal_form, r2.normal_form));
  CHECK(r1.log_prob == r2.log_prob);
  CHECK(r1.log_prob == doctest::Approx(std::log(0.5)));
  bool is_bool_const = alpha_eq(r1.normal_form, P("true")) || alpha_eq(r1.normal_form, P("false"));
  CHECK(is_bool_const);

  // deterministic input: probability 1
  auto d = sample_reduce(empty_ctx(), P("(\\x:Bool. x) true"), 0, 1000);
  CHECK(alpha_eq(d.normal_form, P("true")));
  CHECK(d.log_prob == doctest::Approx(0.0));

  // two nested fair coins: every leaf carries log(1/4)
  ExprPtr nested =
      P("random[0.5](\\x:Bool. if x then random[0.5](\\y:Bool. y) else false)");
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto r = sample_reduce(empty_ctx(), nested, seed, 1000);
    CHECK(r.log_prob == doctest::Approx(std::log(0.25)));
  }
  CHECK_THROWS_AS(sample_reduce(empty_ctx(), nested, 0, 1), FuelExhausted);
}

TEST_CASE("enumerate_tree: exact leaf distributions") {
  auto t = enumerate_tree(empty_ctx(), P("random[0.3](\\x:Bool. x)"), 1000, 1000);
  auto leaves = leaf_map(t);
  REQUIRE(leaves.size() == 2);
  CHECK(leaves["true"] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(leaves["false"] == doctest::Approx(0.7).epsilon(1e-12));

  // deterministic inputs give a single unit-mass leaf
  auto d = enumerate_tree(empty_ctx(), P("(\\x:Bool. if x then false else true) true"), 100, 10);
  auto dl = leaf_distribution(d);
  REQUIRE(dl.size() == 1);
  CHECK(dl[0].second == doctest::Approx(1.0));

  // a coin feeding a dispatch over {Bool, Unit}
  auto m = enumerate_tree(
      empty_ctx(),
      P("case z {Bool => true; Unit => false;}(random[0.5](\\x:Bool. if x then false else 1))"),
      1000, 1000);
  auto ml = leaf_map(m);
  REQUIRE(ml.size() == 2);
  CHECK(ml["true"] == doctest::Approx(0.5));
  CHECK(ml["false"] == doctest::Approx(0.5));

  CHECK_THROWS_AS(enumerate_tree(empty_ctx(), P("random[0.5](\\x:Bool. x)"), 1000, 1),
                  LeafCapExceeded);
  // serialization for inspection
  std::string json = tree_to_json(t);
  CHECK(json.find("\"probability\":0.3") != std::string::npos);
  CHECK(json.find("\"expr\"") != std::string::npos);
}

TEST_CASE("types_of / reductions_of") {
  ExprPtr mix = P("random[0.5](\\x:Bool. if x then true else 1)");
  auto tr = types_of(empty_ctx(), mix);
  REQUIRE(!tr.notype);
  REQUIRE(tr.types.size() == 2);
  CHECK(alpha_eq(tr.types[0], P("Unit")));
  CHECK(alpha_eq(tr.types[1], P("Bool")));
  auto reds = reductions_of(empty_ctx(), mix);
  REQUIRE(reds.size() == 2);
  CHECK(alpha_eq(reds[0], P("1")));
  CHECK(alpha_eq(reds[1], P("true")));

  // untypable deterministic expressions are NOTYPE with no reductions
  auto bad = types_of(empty_ctx(), P("true false"));
  CHECK(bad.notype);
  CHECK(bad.types.empty());
  CHECK(reductions_of(empty_ctx(), P("true false")).empty());

  // deterministic expressions collapse to singletons
  auto one = types_of(empty_ctx(), P("(\\x:Bool. x) true"));
  REQUIRE(one.types.size() == 1);
  CHECK(alpha_eq(one.types[0], P("Bool")));
}

TEST_CASE("types_of: type-level distributions") {
  ExprPtr tl = P("random[0.5](\\x:Bool. if x then Bool else Unit)");
  auto tr = types_of(empty_ctx(), tl);
  REQUIRE(tr.types.size() == 1);
  CHECK(alpha_eq(tr.types[0], e_star()));
  auto reds = reductions_of(empty_ctx(), tl);
  REQUIRE(reds.size() == 2);
  CHECK(is_legal(empty_ctx(), tl));  // uniformly kind-sorted
}

TEST_CASE("is_legal") {
  CHECK(is_legal(empty_ctx(), P("random[0.5](\\x:Bool. if x then true else 1)")));
  CHECK(is_legal(empty_ctx(), P("true")));
  // mixing a type with a term crosses sorts
  CHECK(!is_legal(empty_ctx(), P("random[0.5](\\x:Bool. if x then Bool else true)")));
  CHECK(!is_legal(empty_ctx(), P("true false")));
  // an abstraction whose body has a redex over the bound variable is illegal
  ExprPtr capture = mk_lam(
      "x", e_bool_type(),
      mk_random(0.5, mk_lam("y", e_bool_type(),
                            mk_if(mk_var("y"), mk_var("x"), e_true()))));
  CHECK(!is_legal(empty_ctx(), capture));
}

TEST_CASE("judge_prob: exact and sampled") {
  JudgeOptions exact;
  CHECK(judge_prob(empty_ctx(), P("random[0.5](\\x:Bool. if x then true else 1)"), P("Bool"),
                   exact) == doctest::Approx(0.5));
  CHECK(judge_prob(empty_ctx(), P("true"), P("Bool"), exact) == doctest::Approx(1.0));
  CHECK(judge_prob(empty_ctx(), P("random[0.25](\\x:Bool. x)"), P("Bool"), exact) ==
        doctest::Approx(1.0));
  CHECK(judge_prob(empty_ctx(), P("random[0.25](\\x:Bool. x)"), P("Unit"), exact) ==
        doctest::Approx(0.0));

  JudgeOptions sampled;
  sampled.mode = JudgeMode::Sampled;
  sampled.n_samples = 20000;
  sampled.seed = 5;
  double est = judge_prob(empty_ctx(), P("random[0.5](\\x:Bool. if x then true else 1)"),
                          P("Bool"), sampled);
  CHECK(std::abs(est - 0.5) < 4.0 * std::sqrt(0.25 / 20000.0));
}

TEST_CASE("type_distribution: masses sum to one over the TYPES support") {
  ExprPtr mix = P("random[0.3](\\x:Bool. if x then true else 1)");
  auto dist = type_distribution(empty_ctx(), mix);
  REQUIRE(dist.size() == 2);
  double total = 0;
  for (const auto& [ty, p] : dist) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-12);
  auto tr = types_of(empty_ctx(), mix);
  REQUIRE(tr.types.size() == dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    CHECK(alpha_eq(dist[i].first, tr.types[i]));
    CHECK(dist[i].second == doctest::Approx(alpha_eq(dist[i].first, P("Bool")) ? 0.3 : 0.7));
  }
  // support invariant on corpus expressions
  Corpus gen(53);
  for (int i = 0; i < 25; ++i) {
    ExprPtr e = gen.legal(2);
    auto d = type_distribution(empty_ctx(), e, 4000, 4000);
    auto t = types_of(empty_ctx(), e);
    REQUIRE(d.size() == t.types.size());
    double sum = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      CHECK(alpha_eq(d[k].first, t.types[k]));
      CHECK(d[k].second > 0.0);
      sum += d[k].second;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("corpus: every generated expression is legal") {
  Corpus gen(101);
  int n = 0;
  for (int i = 0; i < 120; ++i) {
    ExprPtr e = gen.legal(2);
    CHECK(is_legal(empty_ctx(), e));
    ++n;
  }
  CHECK(n == 120);
}

TEST_CASE("property: weak preservation along every probabilistic step") {
  Corpus gen(23);
  auto subset = [](const std::vector<ExprPtr>& small, const std::vector<ExprPtr>& big) {
    for (const auto& s : small) {
      bool found = false;
      for (const auto& b : big)
        if (alpha_eq(s, b)) found = true;
      if (!found) return false;
    }
    return true;
  };
  int edges = 0;
  for (int i = 0; i < 40; ++i) {
    ExprPtr e = gen.legal(2);
    auto tree = enumerate_tree(empty_ctx(), e, 4000, 4000);
    // walk every edge of the tree
    std::vector<const ReductionTree*> work{&tree};
    while (!work.empty()) {
      const ReductionTree* node = work.back();
      work.pop_back();
      if (node->children.empty()) continue;
      Analyzer an;
      auto parent = an.analyze(empty_ctx(), node->expr);
      REQUIRE(!parent.notype);
      for (const auto& [w, child] : node->children) {
        Analyzer an2;
        auto ca = an2.analyze(empty_ctx(), child->expr);
        CHECK(!ca.notype);
        CHECK(!ca.types.empty());
        CHECK(!ca.reductions.empty());
        CHECK(subset(ca.types, parent.types));
        CHECK(subset(ca.reductions, parent.reductions));
        ++edges;
        if (edges < 4000) work.push_back(child.get());
      }
    }
  }
  CHECK(edges > 200);
}

TEST_CASE("property: progress with branch weights summing to one") {
  Corpus gen(29);
  for (int i = 0; i < 60; ++i) {
    ExprPtr e = gen.legal(2);
    ExprPtr cur = e;
    for (int s = 0; s < 500; ++s) {
      auto alts = step_rho(empty_ctx(), cur);
      if (alts.empty()) {
        CHECK(is_normal(cur));  // termination in a deterministic normal form
        break;
      }
      double total = 0;
      for (const auto& a : alts) total += a.probability;
      CHECK(std::abs(total - 1.0) <= 1e-12);
      cur = alts[0].result;  // always follow the first branch
    }
  }
}

TEST_CASE("property: aggregated path mass per expression stays within [0,1]") {
  Corpus gen(31);
  for (int i = 0; i < 40; ++i) {
    ExprPtr e = gen.legal(2);
    auto tree = enumerate_tree(empty_ctx(), e, 4000, 4000);
    std::map<std::string, double> acc;
    node_mass(tree, 1.0, acc);
    for (const auto& [k, mass] : acc) CHECK(mass <= 1.0 + 1e-12);
    // total leaf mass is exactly one
    double total = 0;
    for (const auto& [leaf, p] : leaf_distribution(tree)) total += p;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("property: tree leaves agree with the TYPES/REDUCTIONS operators") {
  Corpus gen(37);
  for (int i = 0; i < 50; ++i) {
    ExprPtr e = gen.legal(2);
    auto leaves = leaf_distribution(enumerate_tree(empty_ctx(), e, 4000, 4000));
    auto reds = reductions_of(empty_ctx(), e);
    auto tr = types_of(empty_ctx(), e);
    REQUIRE(!tr.notype);
    // leaf set equals REDUCTIONS
    REQUIRE(leaves.size() == reds.size());
    for (const auto& [leaf, p] : leaves) {
      CHECK(p > 0.0);
      bool found = false;
      for (const auto& r : reds)
        if (alpha_eq(leaf, r)) found = true;
      CHECK(found);
    }
    // the set of leaf types equals TYPES
    ExprSet leaf_types;
    for (const auto& [leaf, p] : leaves)
      leaf_types.insert(infer_type(empty_ctx(), leaf));
    REQUIRE(leaf_types.size() == tr.types.size());
    for (const auto& t : tr.types) CHECK(leaf_types.count(t) == 1);
  }
}

TEST_CASE("property: sampled frequencies match exact leaf mass") {
  Corpus gen(41);
  const std::uint64_t n = 100000;
  for (int i = 0; i < 4; ++i) {
    ExprPtr e = gen.legal(2);
    auto leaves = leaf_distribution(enumerate_tree(empty_ctx(), e, 4000, 4000));
    std::map<std::string, std::uint64_t> counts;
    for (std::uint64_t s = 0; s < n; ++s)
      counts[alpha_key(sample_reduce(empty_ctx(), e, 1000 + s, 4000).normal_form)]++;
    for (const auto& [leaf, p] : leaves) {
      double freq = static_cast<double>(counts[alpha_key(leaf)]) / static_cast<double>(n);
      double band = 4.0 * std::sqrt(p * (1 - p) / static_cast<double>(n));
      CHECK(std::abs(freq - p) <= band + 1e-12);
    }
  }
}

TEST_CASE("property: no random fires twice on any path (stochastic memoization)") {
  // All corpus weights are distinct, so a duplicated coin would show up as a
  // repeated branch weight along a root-to-leaf path.
  Corpus gen(43);
  for (int i = 0; i < 40; ++i) {
    ExprPtr e = gen.legal(2);
    struct Frame {
      const ReductionTree* node;
      std::vector<double> fired;
    };
    auto tree = enumerate_tree(empty_ctx(), e, 4000, 4000);
    std::vector<Frame> work{{&tree, {}}};
    while (!work.empty()) {
      Frame f = work.back();
      work.pop_back();
      if (f.node->children.size() > 1) {
        double rho = f.node->children[0].first;
        for (double seen : f.fired)
          CHECK(std::abs(seen - rho) > 1e-12);
        f.fired.push_back(rho);
      }
      for (const auto& [w, child] : f.node->children) work.push_back({child.get(), f.fired});
    }
  }
}

TEST_CASE("analysis: dispatch legality side conditions") {
  // arguments with several types route through matching cases only
  ExprPtr ok = P("case z {Bool => true; Unit => 1;}(random[0.5](\\x:Bool. if x then false else 1))");
  CHECK(is_legal(empty_ctx(), ok));
  // a missing case makes the expression illegal
  ExprPtr missing = P("case z {Bool => true;}(random[0.5](\\x:Bool. if x then false else 1))");
  CHECK(!is_legal(empty_ctx(), missing));
  auto tr = types_of(empty_ctx(), missing);
  CHECK(tr.notype);
  // a plain application requires the argument's TYPES set to be a singleton
  ExprPtr app = mk_app(mk_lam("x", e_bool_type(), mk_var("x")),
                       P("random[0.5](\\x:Bool. if x then true else 1)"));
  CHECK(!is_legal(empty_ctx(), app));
}
