#pragma once

#include <stdexcept>
#include <string>

namespace pdts {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Surface syntax errors carry a source position.
struct ParseError : Error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : Error(msg + " (line " + std::to_string(line_) + ", col " + std::to_string(col_) + ")"),
        line(line_), col(col_) {}
};

// Substituting a non-value into a pair component would leave the pair outside
// the value grammar.
struct PairSubstitutionViolation : Error {
  using Error::Error;
};

struct UnboundVariable : Error {
  std::string name;
  explicit UnboundVariable(const std::string& n) : Error("unbound variable: " + n), name(n) {}
};

struct NotTypable : Error {
  std::string rule;
  NotTypable(const std::string& rule_, const std::string& msg)
      : Error("not typable [" + rule_ + "]: " + msg), rule(rule_) {}
};

struct FuelExhausted : Error {
  using Error::Error;
};

// A probabilistic term with no permitted redex that is not a deterministic
// normal form; only reachable from illegal inputs.
struct StuckExpression : Error {
  using Error::Error;
};

struct DispatchNoMatch : Error {
  using Error::Error;
};
struct DispatchAmbiguous : Error {
  using Error::Error;
};

struct LeafCapExceeded : Error {
  using Error::Error;
};

struct DuplicateName : Error {
  explicit DuplicateName(const std::string& n) : Error("duplicate name: " + n) {}
};

struct UnknownSymbol : Error {
  using Error::Error;
};
struct MissingFunctionTable : Error {
  using Error::Error;
};

struct TooManyWorlds : Error {
  using Error::Error;
};
struct TooManyAtoms : Error {
  using Error::Error;
};

struct AllSamplesRejected : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};

}  // namespace pdts
