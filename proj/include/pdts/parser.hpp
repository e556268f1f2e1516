#pragma once

#include <functional>
#include <string>

#include "pdts/expr.hpp"

namespace pdts {

// Callback used to elaborate "let x = e1 in e2": given the binder context in
// scope at the let and e1, returns e1's type so the let can desugar to an
// annotated application. The kernel's infer_type is the intended oracle; it is
// injected here to keep the parser independent of the type checker.
using TypeOracle = std::function<ExprPtr(const Context&, const ExprPtr&)>;

// Parses the surface syntax. Throws ParseError with line/column on bad input;
// a `let` without an oracle is a parse error.
ExprPtr parse(const std::string& text, const TypeOracle& oracle = {});

}  // namespace pdts
