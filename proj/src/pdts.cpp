#include "pdts/pdts.hpp"

namespace pdts {

ExprPtr parse_term(const std::string& text) {
  static const TypeOracle oracle = [](const Context& ctx, const ExprPtr& e) {
    return infer_type(ctx, e);
  };
  return parse(text, oracle);
}

}  // namespace pdts
