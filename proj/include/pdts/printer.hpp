#pragma once

#include <string>

#include "pdts/expr.hpp"

namespace pdts {

// Deterministic surface rendering; parse(print(e)) is alpha-equivalent to e.
// Non-dependent Pi/Sigma whose binder is "_" print as "A -> B" / "A * B".
std::string print(const ExprPtr& e);

std::string print_context(const Context& ctx);

}  // namespace pdts
