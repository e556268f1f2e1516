#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdts/expr.hpp"
#include "pdts/kernel.hpp"

namespace pdts {

// One weighted reduction alternative. Alternatives offered for a single
// expression carry probabilities summing to 1.
struct WeightedStep {
  double probability;
  ExprPtr result;
};

struct RedexChoice {
  std::vector<int> path;
  detail::RedexKind kind;
};

// The unique permitted redex: Random/dispatch redexes first (leftmost-outermost
// among them), then the leftmost-outermost free deterministic redex. Absent iff
// e is a deterministic normal form or stuck.
std::optional<RedexChoice> select_redex(const Context& ctx, const ExprPtr& e);
inline std::optional<RedexChoice> select_redex(const ExprPtr& e) {
  return select_redex(Context{}, e);
}

// Weighted one-step reduction: empty iff no permitted redex; a Random redex
// yields two alternatives (rho, 1-rho), everything else a single one.
std::vector<WeightedStep> step_rho(const Context& ctx, const ExprPtr& e);
inline std::vector<WeightedStep> step_rho(const ExprPtr& e) { return step_rho(Context{}, e); }

struct SampleResult {
  ExprPtr normal_form;
  double log_prob;
  std::uint64_t steps;
};

// Seeded reduction to a deterministic normal form; identical seeds give
// identical runs. Throws StuckExpression on illegal inputs that jam.
SampleResult sample_reduce(const Context& ctx, const ExprPtr& e, std::uint64_t seed,
                           std::uint64_t fuel);

struct ReductionTree {
  ExprPtr expr;
  std::vector<std::pair<double, std::unique_ptr<ReductionTree>>> children;
  bool leaf() const { return children.empty(); }
};

// Exhaustive weighted reduction tree; leaves are deterministic normal forms.
ReductionTree enumerate_tree(const Context& ctx, const ExprPtr& e, std::uint64_t fuel,
                             std::uint64_t leaf_cap);

// Aggregated leaf distribution (compensated summation), sorted canonically.
std::vector<std::pair<ExprPtr, double>> leaf_distribution(const ReductionTree& tree);

std::string tree_to_json(const ReductionTree& tree, int indent = -1);

// Result of the TYPES operator; `notype` marks expressions outside the typed
// fragment (the sentinel is deliberately not an Expr).
struct TypesResult {
  bool notype = false;
  std::vector<ExprPtr> types;  // normal forms, canonically sorted
};

TypesResult types_of(const Context& ctx, const ExprPtr& e);
std::vector<ExprPtr> reductions_of(const Context& ctx, const ExprPtr& e);

// Shared memo for the mutually recursive TYPES/REDUCTIONS computation.
class Analyzer {
 public:
  struct Analysis {
    bool notype = false;
    std::vector<ExprPtr> types;
    std::vector<ExprPtr> reductions;
  };

  const Analysis& analyze(const Context& ctx, const ExprPtr& e);

 private:
  Analysis compute(const Context& ctx, const ExprPtr& e);
  Analysis formation(const Context& ctx, const std::string& var, const ExprPtr& domain,
                     const ExprPtr& body, bool is_pi);
  std::map<std::string, Analysis> memo_;
};

// NOTYPE excluded and all reachable types uniformly sorted.
bool is_legal(const Context& ctx, const ExprPtr& e);

enum class JudgeMode { Exact, Sampled };

struct JudgeOptions {
  JudgeMode mode = JudgeMode::Exact;
  std::uint64_t n_samples = 10000;
  std::uint64_t seed = 0;
  std::uint64_t fuel = 1u << 20;
  std::uint64_t leaf_cap = 1u << 20;
};

// Probability that e reduces to a normal form of type ty: exact mass from the
// reduction tree, or the empirical frequency over seeded samples.
double judge_prob(const Context& ctx, const ExprPtr& e, const ExprPtr& ty,
                  const JudgeOptions& opts);

// The full judgment distribution: normal-form types with their reachable
// probability mass. Masses sum to 1 and the support equals the TYPES set.
std::vector<std::pair<ExprPtr, double>> type_distribution(const Context& ctx, const ExprPtr& e,
                                                          std::uint64_t fuel = 1u << 20,
                                                          std::uint64_t leaf_cap = 1u << 20);

}  // namespace pdts
