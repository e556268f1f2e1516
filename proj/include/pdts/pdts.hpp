#pragma once

#include "pdts/bridge.hpp"
#include "pdts/dtn.hpp"
#include "pdts/expr.hpp"
#include "pdts/kernel.hpp"
#include "pdts/mln.hpp"
#include "pdts/parser.hpp"
#include "pdts/printer.hpp"
#include "pdts/prob.hpp"

namespace pdts {

// parse() with let-elaboration wired to the type checker.
ExprPtr parse_term(const std::string& text);

}  // namespace pdts
