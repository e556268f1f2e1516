#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pdts/expr.hpp"

namespace pdts {

// A derivable typing statement ctx |- term : type. Only produced by infer_type
// and check paths, never constructed free-hand.
class Judgment {
 public:
  static Judgment derive(const Context& ctx, const ExprPtr& term);

  const Context& ctx() const { return ctx_; }
  const ExprPtr& term() const { return term_; }
  const ExprPtr& type() const { return type_; }

 private:
  Judgment(Context ctx, ExprPtr term, ExprPtr type)
      : ctx_(std::move(ctx)), term_(std::move(term)), type_(std::move(type)) {}
  Context ctx_;
  ExprPtr term_, type_;
};

// Reduction fuel that comfortably covers typable terms (empirically 10*size^2).
std::uint64_t default_fuel(const ExprPtr& e);

// One leftmost-outermost step over a free redex of a deterministic expression;
// absent iff e is in normal form.
std::optional<ExprPtr> step_beta(const ExprPtr& e);

ExprPtr normalize(const ExprPtr& e, std::uint64_t fuel);
inline ExprPtr normalize(const ExprPtr& e) { return normalize(e, default_fuel(e)); }

bool is_normal(const ExprPtr& e);

// Type inference for deterministic expressions; the returned type is in normal
// form. Throws NotTypable / UnboundVariable.
ExprPtr infer_type(const Context& ctx, const ExprPtr& e);

bool beta_equiv(const ExprPtr& a, const ExprPtr& b, std::uint64_t fuel);
inline bool beta_equiv(const ExprPtr& a, const ExprPtr& b) {
  return beta_equiv(a, b, default_fuel(a) + default_fuel(b));
}

// Decidable judgment check: does e have a type beta-equivalent to ty?
bool check_judgment(const Context& ctx, const ExprPtr& e, const ExprPtr& ty);

// Every declared type must be well-sorted in its prefix context.
void validate_context(const Context& ctx);

bool is_sort(const ExprPtr& e);

namespace detail {

enum class RedexKind { Beta, Random, Dispatch };

struct RedexInfo {
  std::vector<int> path;
  RedexKind kind;
};

// Unified redex selection. With prob_mode, Random and ready dispatch redexes
// take priority (leftmost-outermost among them, no freeness requirement);
// otherwise the leftmost-outermost free deterministic redex is chosen.
// `ctx` is needed to type dispatch arguments; may be null for pure terms.
std::optional<RedexInfo> find_redex(const ExprPtr& e, bool prob_mode, const Context* ctx);

// Weighted contraction alternatives of the redex at `info`.
std::vector<std::pair<double, ExprPtr>> contract(const Context& ctx, const ExprPtr& root,
                                                 const RedexInfo& info);

ExprPtr get_at(const ExprPtr& root, const std::vector<int>& path);
ExprPtr replace_at(const ExprPtr& root, const std::vector<int>& path, const ExprPtr& repl);

}  // namespace detail

}  // namespace pdts
